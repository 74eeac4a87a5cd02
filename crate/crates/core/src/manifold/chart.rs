use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::jet::{Jet, MAX_DIM};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::pointwise::{standard_pair, NordenPoint};
use crate::tensor::{Slot, Tensor};

/// Serialized form of a chart. `g` holds the upper triangle row by row: row
/// `i` lists `g_ii, g_i(i+1), .., g_i(dim−1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartJson {
    pub name: String,
    pub dim: usize,
    pub g: Vec<Vec<String>>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    pub domain: Vec<[f64; 2]>,
    /// Optional `u` for charts of the form `g = e^{2u} g0`, used only for
    /// diagnostics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal_factor: Option<String>,
}

/// A coordinate patch with metric entries given as expressions and a
/// constant almost complex structure.
#[derive(Clone, Debug)]
pub struct Chart {
    source: ChartJson,
    dim: usize,
    /// Upper triangle, packed.
    g: Vec<Expr>,
    /// `dg[l][k] = ∂_l g_k`
    dg: Vec<Vec<Expr>>,
    /// `ddg[l][m][k] = ∂_l ∂_m g_k`
    ddg: Vec<Vec<Vec<Expr>>>,
    j: DMatrix<f64>,
    conformal_factor: Option<Expr>,
}

pub const BUILTIN_CHARTS: [&str; 4] = ["flat4", "flat6", "conformal4", "conformal6"];

fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * dim - i * (i + 1) / 2 + j
}

fn standard_json(name: &str, n: usize, factor: Option<&str>) -> ChartJson {
    let dim = 2 * n;
    let (_, j0) = standard_pair(n);
    let g = (0..dim)
        .map(|i| {
            (i..dim)
                .map(|k| {
                    if i != k {
                        "0".to_string()
                    } else {
                        let sign = if i < n { "" } else { "-" };
                        match factor {
                            Some(u) => format!("{sign}exp(2*({u}))"),
                            None => format!("{sign}1"),
                        }
                    }
                })
                .collect()
        })
        .collect();
    ChartJson {
        name: name.into(),
        dim,
        g,
        j: j0.transpose().as_slice().to_vec(),
        domain: vec![[-1.0, 1.0]; dim],
        conformal_factor: factor.map(str::to_string),
    }
}

impl Chart {
    /// Parses and differentiates the metric entries; checks shapes, the
    /// complex structure and the metric at the probe points.
    pub fn from_json(source: ChartJson) -> Result<Self> {
        let dim = source.dim;
        if dim < 4 || dim % 2 != 0 || dim > MAX_DIM {
            return Err(Error::Config(format!(
                "chart `{}`: dimension must be even and between 4 and {MAX_DIM}, got {dim}",
                source.name
            )));
        }
        if source.g.len() != dim
            || source
                .g
                .iter()
                .enumerate()
                .any(|(i, row)| row.len() != dim - i)
        {
            return Err(Error::Config(format!(
                "chart `{}`: g must list the upper triangle, row i holding dim − i entries",
                source.name
            )));
        }
        if source.j.len() != dim * dim {
            return Err(Error::Config(format!(
                "chart `{}`: J must have {} entries",
                source.name,
                dim * dim
            )));
        }
        if source.domain.len() != dim || source.domain.iter().any(|[lo, hi]| !(lo < hi)) {
            return Err(Error::Config(format!(
                "chart `{}`: domain must give one interval lo < hi per coordinate",
                source.name
            )));
        }
        let g: Vec<Expr> = source
            .g
            .iter()
            .flatten()
            .map(|text| parse(text, dim))
            .collect::<std::result::Result<_, _>>()?;
        let dg: Vec<Vec<Expr>> = (0..dim)
            .map(|l| g.iter().map(|e| e.differentiate(l)).collect())
            .collect();
        let ddg = (0..dim)
            .map(|l| {
                (0..dim)
                    .map(|m| dg[m].iter().map(|e| e.differentiate(l)).collect())
                    .collect()
            })
            .collect();
        let conformal_factor = source
            .conformal_factor
            .as_deref()
            .map(|u| parse(u, dim))
            .transpose()?;
        let j = DMatrix::from_row_slice(dim, dim, &source.j);
        let chart = Self {
            dim,
            g,
            dg,
            ddg,
            j,
            conformal_factor,
            source,
        };
        chart.validate()?;
        Ok(chart)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let source: ChartJson =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("chart JSON: {e}")))?;
        Self::from_json(source)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        let source = match name {
            "flat4" => standard_json(name, 2, None),
            "flat6" => standard_json(name, 3, None),
            "conformal4" => standard_json(name, 2, Some("x1^2 - x3^2")),
            "conformal6" => standard_json(name, 3, Some("x1^2 - x4^2")),
            _ => return None,
        };
        Some(Self::from_json(source).expect("built-in charts are valid"))
    }

    /// A built-in chart name or a path to a chart JSON file.
    pub fn resolve(path_or_name: &str) -> Result<Self> {
        if let Some(chart) = Self::builtin(path_or_name) {
            return Ok(chart);
        }
        let path = Path::new(path_or_name);
        if !path.exists() {
            return Err(Error::Config(format!(
                "`{path_or_name}` is neither a built-in chart ({}) nor an existing file",
                BUILTIN_CHARTS.join(", ")
            )));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn name(&self) -> &str {
        &self.source.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn j_tensor(&self) -> Tensor {
        Tensor::from_matrix(&self.j, [Slot::Up, Slot::Down])
    }

    pub fn domain(&self) -> Vec<(f64, f64)> {
        self.source.domain.iter().map(|[a, b]| (*a, *b)).collect()
    }

    pub fn conformal_factor(&self) -> Option<&Expr> {
        self.conformal_factor.as_ref()
    }

    pub fn to_json(&self) -> &ChartJson {
        &self.source
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Config(format!(
                "point has {} coordinates, chart `{}` has dimension {}",
                x.len(),
                self.name(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for k in i..d {
                let v = self.g[packed_index(d, i, k)].evaluate(x)?;
                m[(i, k)] = v;
                m[(k, i)] = v;
            }
        }
        Ok(m)
    }

    /// `g_ik` with gradient, row-major.
    pub(crate) fn metric_jets(&self, x: &[f64]) -> Result<Vec<Jet>> {
        self.check_point(x)?;
        let d = self.dim;
        let mut out = vec![Jet::ZERO; d * d];
        for i in 0..d {
            for k in i..d {
                let p = packed_index(d, i, k);
                let mut jet = Jet::constant(self.g[p].evaluate(x)?);
                for l in 0..d {
                    jet.grad[l] = self.dg[l][p].evaluate(x)?;
                }
                out[i * d + k] = jet;
                out[k * d + i] = jet;
            }
        }
        Ok(out)
    }

    /// `∂_l g_ik` with gradient, indexed `[l][i][k]`.
    pub(crate) fn metric_derivative_jets(&self, x: &[f64]) -> Result<Vec<Jet>> {
        self.check_point(x)?;
        let d = self.dim;
        let mut out = vec![Jet::ZERO; d * d * d];
        for l in 0..d {
            for i in 0..d {
                for k in i..d {
                    let p = packed_index(d, i, k);
                    let mut jet = Jet::constant(self.dg[l][p].evaluate(x)?);
                    for m in 0..d {
                        jet.grad[m] = self.ddg[m][l][p].evaluate(x)?;
                    }
                    out[(l * d + i) * d + k] = jet;
                    out[(l * d + k) * d + i] = jet;
                }
            }
        }
        Ok(out)
    }

    /// `(g(x), J)` with `F = 0`, validated as a Norden pair.
    pub fn norden_pair(&self, x: &[f64]) -> Result<NordenPoint> {
        NordenPoint::new(
            Tensor::from_matrix(&self.metric(x)?, [Slot::Down, Slot::Down]),
            self.j_tensor(),
            Tensor::zeros(self.dim, vec![Slot::Down; 3]),
        )
    }

    /// Five fixed points inside the domain, kept away from the coordinate
    /// hyperplanes.
    pub fn probe_points(&self) -> Vec<Vec<f64>> {
        const GOLDEN: f64 = 0.618_033_988_749_895;
        const SILVER: f64 = 0.414_213_562_373_095;
        (0..5)
            .map(|k| {
                self.source
                    .domain
                    .iter()
                    .enumerate()
                    .map(|(i, [lo, hi])| {
                        let frac = ((k + 1) as f64 * GOLDEN + (i + 1) as f64 * SILVER).fract();
                        let width = hi - lo;
                        let mut x = lo + width * (0.1 + 0.8 * frac);
                        if x.abs() < 0.05 * width {
                            x += 0.1 * width;
                        }
                        x
                    })
                    .collect()
            })
            .collect()
    }

    /// Checks the Norden conditions at every probe point.
    pub fn validate(&self) -> Result<()> {
        for x in self.probe_points() {
            self.norden_pair(&x).map_err(|e| {
                Error::Config(format!("chart `{}` at {x:?}: {e}", self.source.name))
            })?;
        }
        Ok(())
    }
}
