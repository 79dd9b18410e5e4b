//! Run configuration, read from a TOML file with one section per stage.

use std::path::Path;

use anyhow::{bail, Context, Result};
use riccati_core::expr::{make_family, parse, FamilyKind, FamilySpec};
use riccati_core::quad::{GridConfig, TailConfig};
use riccati_core::riccati::SolverConfig;
use riccati_core::Coefficients;
use serde::{Deserialize, Serialize};

/// Every key with its default, as accepted in a config file.
pub const DEFAULTS: &str = r#"[equation]
# inline coefficients ...
# p = "1"
# q = "2/t^3"
a = 1.0
# ... or a family: power_log, tail_power_log, constant_q,
# r1_growing, r1_decaying, r2_growing, r2_decaying
# family = "power_log"
k = 1.0
lambda = 2.0
mu = 0.0
# optional closed forms: cum_inv_p, tail_inv_p, phi, dphi, antiderivative

[grid]
nodes = 512
scale = 1e6          # grid ends where its variable reaches this
# uniform_end = 3.0  # uniform grid on [a, uniform_end] instead

[tail]
horizon = 1e6
r_conv = 0.75
tolerance = 1e-2
divergence_threshold = 1e15
quad_tol = 1e-10

[solver]
kinds = ["auto"]
# param = 0.6        # gamma, delta or omega for kinds that take one
tol = 1e-9
max_iter = 200
margin = 0.9
applicability = 0.05

[verify]
band = 0.02
oracle_tolerance = 1e-4
fixed_point_tolerance = 1e-6
residual_tolerance = 1e-6
companion_residual_tolerance = 1e-4
identity_tolerance = 1e-5
wronskian_variation = 1e-5
# window = [0.0, 2.5]

[sweep]
lambda = [1.5, 2.0, 2.5, 3.0]
mu = [-1.0, 0.0, 1.0]
k = [0.5, 2.0]

[output]
format = "json"      # json, csv or table
"#;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub equation: EquationSection,
    pub grid: GridSection,
    pub tail: TailSection,
    pub solver: SolverSection,
    pub verify: VerifySection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquationSection {
    pub family: Option<String>,
    pub p: Option<String>,
    pub q: Option<String>,
    pub a: f64,
    pub k: f64,
    pub lambda: f64,
    pub mu: f64,
    pub cum_inv_p: Option<String>,
    pub tail_inv_p: Option<String>,
    pub phi: Option<String>,
    pub dphi: Option<String>,
    pub antiderivative: Option<String>,
}

impl Default for EquationSection {
    fn default() -> Self {
        EquationSection {
            family: None,
            p: None,
            q: None,
            a: 1.0,
            k: 1.0,
            lambda: 2.0,
            mu: 0.0,
            cum_inv_p: None,
            tail_inv_p: None,
            phi: None,
            dphi: None,
            antiderivative: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub nodes: usize,
    pub scale: f64,
    pub uniform_end: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridConfig::default();
        GridSection { nodes: g.nodes, scale: g.scale, uniform_end: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailSection {
    pub horizon: f64,
    pub r_conv: f64,
    pub tolerance: f64,
    pub divergence_threshold: f64,
    pub quad_tol: f64,
}

impl Default for TailSection {
    fn default() -> Self {
        let t = TailConfig::default();
        TailSection {
            horizon: t.horizon,
            r_conv: t.r_conv,
            tolerance: t.tolerance,
            divergence_threshold: t.divergence_threshold,
            quad_tol: t.quad_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub kinds: Vec<String>,
    pub param: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub margin: f64,
    pub applicability: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            kinds: vec!["auto".into()],
            param: None,
            tol: s.tol,
            max_iter: s.max_iter,
            margin: s.margin,
            applicability: s.applicability,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub band: f64,
    pub oracle_tolerance: f64,
    pub fixed_point_tolerance: f64,
    pub residual_tolerance: f64,
    pub companion_residual_tolerance: f64,
    pub identity_tolerance: f64,
    pub wronskian_variation: f64,
    pub window: Option<[f64; 2]>,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            band: 0.02,
            oracle_tolerance: 1e-4,
            fixed_point_tolerance: 1e-6,
            residual_tolerance: 1e-6,
            companion_residual_tolerance: 1e-4,
            identity_tolerance: 1e-5,
            wronskian_variation: 1e-5,
            window: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub k: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { lambda: vec![1.5, 2.0, 2.5, 3.0], mu: vec![-1.0, 0.0, 1.0], k: vec![0.5, 2.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub format: Format,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn tail(&self) -> TailConfig {
        let t = &self.tail;
        TailConfig {
            horizon: t.horizon,
            r_conv: t.r_conv,
            tolerance: t.tolerance,
            divergence_threshold: t.divergence_threshold,
            quad_tol: t.quad_tol,
        }
    }

    pub fn grid(&self) -> GridConfig {
        GridConfig { nodes: self.grid.nodes, scale: self.grid.scale, tail: self.tail() }
    }

    pub fn solver(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig { grid: self.grid(), tol: s.tol, max_iter: s.max_iter, margin: s.margin, applicability: s.applicability }
    }

    pub fn family(&self) -> Result<Option<FamilyKind>> {
        match &self.equation.family {
            None => Ok(None),
            Some(name) => match FamilyKind::from_name(name) {
                Some(k) => Ok(Some(k)),
                None => bail!("unknown family {name:?}"),
            },
        }
    }

    pub fn coefficients(&self) -> Result<Coefficients> {
        let e = &self.equation;
        let opt = |s: &Option<String>, what: &str| -> Result<Option<riccati_core::Expr>> {
            s.as_deref().map(|s| parse(s).with_context(|| format!("parsing {what}"))).transpose()
        };
        match self.family()? {
            Some(kind) => {
                if e.q.is_some() {
                    bail!("give either q or a family, not both");
                }
                let p = opt(&e.p, "p")?.unwrap_or(riccati_core::Expr::Const(1.0));
                let mut spec = FamilySpec::new(p, e.a);
                spec.k = e.k;
                spec.lambda = e.lambda;
                spec.mu = e.mu;
                spec.cum_inv_p = opt(&e.cum_inv_p, "cum_inv_p")?;
                spec.tail_inv_p = opt(&e.tail_inv_p, "tail_inv_p")?;
                spec.phi = opt(&e.phi, "phi")?;
                spec.dphi = opt(&e.dphi, "dphi")?;
                spec.antiderivative = opt(&e.antiderivative, "antiderivative")?;
                Ok(make_family(kind, &spec)?)
            }
            None => {
                let (Some(p), Some(q)) = (opt(&e.p, "p")?, opt(&e.q, "q")?) else {
                    bail!("the equation needs p and q, or a family");
                };
                Ok(Coefficients::new(p, q, e.a)?)
            }
        }
    }

    /// The same run with the family parameters replaced.
    pub fn with_params(&self, lambda: f64, mu: f64, k: f64) -> RunConfig {
        let mut c = self.clone();
        c.equation.lambda = lambda;
        c.equation.mu = mu;
        c.equation.k = k;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_text_parses_to_defaults() {
        let c = RunConfig::from_toml(DEFAULTS).unwrap();
        let d = RunConfig::default();
        assert_eq!(serde_json::to_string(&c).unwrap(), serde_json::to_string(&d).unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[grid]\nnode = 3\n").is_err());
    }

    #[test]
    fn inline_and_family_equations() {
        let c = RunConfig::from_toml("[equation]\np = \"1\"\nq = \"2/t^3\"\n").unwrap();
        assert!(c.coefficients().is_ok());
        let c = RunConfig::from_toml("[equation]\nfamily = \"power_log\"\nk = 2.0\nlambda = 3.0\n").unwrap();
        assert_eq!(c.coefficients().unwrap().q_at(2.0).unwrap(), 0.25);
        assert!(RunConfig::from_toml("[equation]\nfamily = \"nope\"\n").unwrap().coefficients().is_err());
    }
}
