//! Loading a chart from JSON and inspecting its Levi-Civita data.

use norden::manifold::{christoffel, levi_civita_curvature, Chart};
use norden::pointwise::classify;
use norden::{component_norm, tolerance};

const CHART: &str = r#"{
  "name": "conformal-cubic",
  "dim": 4,
  "g": [
    ["exp(2*(x1^3 - 3*x1*x3^2))", "0", "0", "0"],
    ["exp(2*(x1^3 - 3*x1*x3^2))", "0", "0"],
    ["-exp(2*(x1^3 - 3*x1*x3^2))", "0"],
    ["-exp(2*(x1^3 - 3*x1*x3^2))"]
  ],
  "J": [0, 0, -1, 0,
        0, 0, 0, -1,
        1, 0, 0, 0,
        0, 1, 0, 0],
  "domain": [[-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5], [-0.5, 0.5]]
}"#;

fn main() -> norden::Result<()> {
    let chart = Chart::from_json_str(CHART)?;
    for x in chart.probe_points().iter().take(2) {
        let gamma = christoffel(&chart, x)?;
        let r = levi_civita_curvature(&chart, x)?;
        let pt = chart.norden_pair(x)?;
        let geometry = norden::manifold::LocalGeometry::new(&chart, x)?;
        let class = classify(&pt.with_f(geometry.f())?, tolerance::CLASSIFICATION)?;
        println!(
            "{x:.3?}: ‖Γ‖ = {:.4}, ‖R‖ = {:.4}, F in {}",
            component_norm(&gamma),
            component_norm(&r),
            class.label()
        );
    }
    let broken = CHART.replace("\"0\", \"0\", \"0\"],", "\"0\", \"0\"],");
    match Chart::from_json_str(&broken) {
        Ok(_) => println!("malformed chart accepted"),
        Err(e) => println!("malformed chart: {e}"),
    }
    Ok(())
}
