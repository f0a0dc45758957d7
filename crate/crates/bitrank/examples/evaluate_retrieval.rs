//! Score a retrieval run: per-query AP, MAP, and the averaged
//! precision-recall curve, written out as CSV.
//!
//! ```sh
//! cargo run --release --example evaluate_retrieval
//! ```

use bitrank::eval::{
    average_precision, evaluate, pr_curve, sample_queries, write_pr_csv, write_summary_csv,
    SummaryRow,
};
use bitrank::hashing::{encode_database, train_lsh};
use bitrank::synth::GaussianMixture;
use bitrank::Result;

fn main() -> Result<()> {
    // the metric primitives work on plain relevance vectors
    let rel = [true, false, true, false];
    let curve = pr_curve(&rel, 2)?;
    println!("relevance (1,0,1,0) with 2 relevant items:");
    for (rank, (recall, precision)) in curve.points().iter().enumerate() {
        println!("  rank {}: precision {precision:.3}, recall {recall:.3}", rank + 1);
    }
    println!("  interpolated AP = {:.4}", average_precision(&rel, 2)?);

    // and end to end over a code database
    let features = GaussianMixture::isotropic(5, 100, 24, 1.2, 0.6).sample(9);
    let model = train_lsh(&features, 24, 10)?;
    let db = encode_database(&model, &features)?;
    let queries = sample_queries(&db, 0.1, 11)?;
    let report = evaluate(&queries, &db, None)?.with_code_kind("lsh");
    println!(
        "evaluated {} queries over {} codes: MAP {:.4} ({} skipped)",
        report.per_query_ap.len(),
        db.len(),
        report.map,
        report.skipped_queries
    );

    let dir = std::env::temp_dir();
    let pr_path = dir.join("bitrank_example_pr.csv");
    let summary_path = dir.join("bitrank_example_summary.csv");
    write_pr_csv(&pr_path, &report.avg_pr)?;
    write_summary_csv(&summary_path, &[SummaryRow::from_report(&report)])?;
    println!("averaged PR curve -> {}", pr_path.display());
    println!("summary row       -> {}", summary_path.display());
    Ok(())
}
