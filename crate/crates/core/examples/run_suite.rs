//! The full verification suite on a small configuration.

use norden::suite::{run_suite, Section, SuiteConfig};

fn main() -> norden::Result<()> {
    let config = SuiteConfig {
        trials: 5,
        dims: vec![4],
        charts: vec!["flat4".into(), "conformal4".into()],
        sections: Section::ALL.to_vec(),
        ..SuiteConfig::default()
    };
    let report = run_suite(&config)?;
    println!("{}", report.to_text());
    let failed: Vec<_> = report.report.failures().map(|c| c.check.as_str()).collect();
    println!(
        "{} aggregated checks, failing: {failed:?}",
        report.report.len()
    );
    Ok(())
}
