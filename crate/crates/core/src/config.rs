//! Line-based run configuration.
//!
//! ```text
//! # comment
//! spec.n = 2
//! spec.k = 2
//! spec.l = 0
//! grid.nodes = 13
//! rhs.amplitude = 1
//! ```
//!
//! Every key not listed in [`RunConfig::to_text`] is rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::baseline;
use crate::error::{Error, Result};
use crate::hessop::{ChartBox, Grid, Profile, RhsSpec};
use crate::hypgeom::PolarChart;
use crate::pogorelov::{HessNorm, ProbeConfig};
use crate::solver::SolveConfig;
use crate::symfunc::QuotientSpec;

/// Name of the echoed configuration inside the output directory.
pub const RESOLVED_NAME: &str = "resolved.cfg";

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    pub continuation_steps: usize,
    pub newton_tol: f64,
    pub max_newton: usize,
    pub backtrack: f64,
    pub cone_margin: f64,
    pub linear_tol: f64,
    pub max_linear: usize,
    pub init_c: Option<f64>,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            continuation_steps: 1,
            newton_tol: 1e-9,
            max_newton: 50,
            backtrack: 0.5,
            cone_margin: 1e-8,
            linear_tol: 1e-10,
            max_linear: 20_000,
            init_c: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: QuotientSpec,
    pub angular: (f64, f64),
    pub radial: (f64, f64),
    /// Nodes per axis on the coarsest grid.
    pub nodes: usize,
    pub rhs: RhsSpec,
    pub solve: SolveSettings,
    /// Probe cells, tried in order.
    pub probe_cells: Vec<ProbeConfig>,
    pub betas: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub levels: usize,
    pub norm: HessNorm,
    pub output_dir: Option<PathBuf>,
}

/// Raw `key -> (line, value)` table.
struct Entries {
    path: PathBuf,
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::ConfigParse {
                path: path.to_path_buf(),
                line,
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `section.key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let valid_key = key.split_once('.').is_some_and(|(s, k)| {
                let ok = |p: &str| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                ok(s) && ok(k)
            });
            if !valid_key {
                return Err(err(format!("malformed key `{key}`")));
            }
            if value.is_empty() {
                return Err(err(format!("missing value for `{key}`")));
            }
            if let Some((first, _)) = map.insert(key.to_string(), (line, value.to_string())) {
                return Err(err(format!("duplicate key `{key}` (first set on line {first})")));
            }
        }
        Ok(Entries {
            path: path.to_path_buf(),
            map,
        })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(_, v)| v)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| value_err(key, "required key is missing"))
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.take(key)
            .map(|v| v.parse::<T>().map_err(|_| value_err(key, format!("cannot parse `{v}`"))))
            .transpose()
    }

    fn float(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn count(&mut self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn list(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.take(key) {
            None => Ok(default.to_vec()),
            Some(v) => float_list(key, &v),
        }
    }

    fn pair(&mut self, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
        let v = self.list(key, &[default.0, default.1])?;
        match v[..] {
            [lo, hi] => Ok((lo, hi)),
            _ => Err(value_err(key, "expected two numbers `lo, hi`")),
        }
    }

    fn reject_leftovers(self) -> Result<()> {
        match self.map.iter().min_by_key(|(_, (line, _))| *line) {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::ConfigParse {
                path: self.path,
                line: *line,
                message: format!("unknown key `{key}`"),
            }),
        }
    }
}

fn value_err(key: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue {
        key: key.to_string(),
        message: message.into(),
    }
}

fn float_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| value_err(key, format!("cannot parse `{}`", x.trim())))
        })
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// The committed baseline with every default filled.
    pub fn baseline() -> Self {
        RunConfig {
            spec: baseline::spec(),
            angular: baseline::ANGULAR,
            radial: baseline::RADIAL,
            nodes: baseline::COARSE_NODES,
            rhs: RhsSpec::constant(1.0),
            solve: SolveSettings::default(),
            probe_cells: baseline::probe_cells().expect("baseline probe cells are valid"),
            betas: baseline::BETAS.to_vec(),
            amplitudes: baseline::AMPLITUDES.to_vec(),
            levels: baseline::LEVELS,
            norm: HessNorm::Spectral,
            output_dir: None,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses and validates; `origin` only labels error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut e = Entries::parse(text, origin)?;
        let defaults = RunConfig::baseline();

        let n: usize = e.require("spec.n")?.parse().map_err(|_| value_err("spec.n", "not an integer"))?;
        let k: usize = e.require("spec.k")?.parse().map_err(|_| value_err("spec.k", "not an integer"))?;
        let l: usize = e.require("spec.l")?.parse().map_err(|_| value_err("spec.l", "not an integer"))?;
        let tau = e.float("spec.tau", 1.0)?;
        if !(tau >= 1.0) {
            return Err(value_err("spec.tau", format!("{tau} is below 1")));
        }
        let spec = QuotientSpec::new(n, k, l, tau).map_err(|err| value_err("spec", err.to_string()))?;

        let angular = e.pair("box.angular", defaults.angular)?;
        let radial = e.pair("box.radial", defaults.radial)?;
        let nodes: usize = e
            .require("grid.nodes")?
            .parse()
            .map_err(|_| value_err("grid.nodes", "not an integer"))?;

        let amplitude: f64 = e
            .require("rhs.amplitude")?
            .parse()
            .map_err(|_| value_err("rhs.amplitude", "not a number"))?;
        let profile = match e.take("rhs.profile").as_deref() {
            None | Some("constant") => Profile::Constant,
            Some("radial_gaussian") => Profile::RadialGaussian {
                center: e.float("rhs.center", 1.0)?,
                width: e.float("rhs.width", 0.5)?,
            },
            Some("cosine_product") => Profile::CosineProduct {
                strength: e.float("rhs.strength", 0.5)?,
                wavenumber: e.float("rhs.wavenumber", 1.0)?,
            },
            Some(other) => return Err(value_err("rhs.profile", format!("unknown profile `{other}`"))),
        };
        let rhs = RhsSpec {
            amplitude,
            profile,
            mu: e.float("rhs.mu", 0.0)?,
            s: e.float("rhs.s", 0.0)?,
        };
        rhs.validate().map_err(|err| value_err("rhs", err.to_string()))?;

        let d = SolveSettings::default();
        let init_c = match e.take("solve.init_c").as_deref() {
            None | Some("auto") => None,
            Some(v) => Some(v.parse().map_err(|_| value_err("solve.init_c", format!("cannot parse `{v}`")))?),
        };
        let solve = SolveSettings {
            continuation_steps: e.count("solve.continuation_steps", d.continuation_steps)?,
            newton_tol: e.float("solve.newton_tol", d.newton_tol)?,
            max_newton: e.count("solve.max_newton", d.max_newton)?,
            backtrack: e.float("solve.backtrack", d.backtrack)?,
            cone_margin: e.float("solve.cone_margin", d.cone_margin)?,
            linear_tol: e.float("solve.linear_tol", d.linear_tol)?,
            max_linear: e.count("solve.max_linear", d.max_linear)?,
            init_c,
        };

        let norm = match e.take("estimate.norm") {
            None => HessNorm::Spectral,
            Some(v) => HessNorm::parse(&v).ok_or_else(|| {
                value_err("estimate.norm", format!("`{v}` is not one of spectral, lambda_max, frobenius"))
            })?,
        };
        let probe_cells = match e.take("probe.cells") {
            None => defaults.probe_cells.clone(),
            Some(v) => parse_cells(&v)?,
        }
        .into_iter()
        .map(|c| ProbeConfig { norm, ..c })
        .collect();

        let config = RunConfig {
            spec,
            angular,
            radial,
            nodes,
            rhs,
            solve,
            probe_cells,
            betas: e.list("sweep.betas", &defaults.betas)?,
            amplitudes: e.list("sweep.amplitudes", &defaults.amplitudes)?,
            levels: e.count("sweep.levels", defaults.levels)?,
            norm,
            output_dir: e.take("output.dir").map(PathBuf::from),
        };
        e.reject_leftovers()?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 5 {
            return Err(value_err("grid.nodes", "need at least 5 nodes per axis"));
        }
        self.grid().map_err(|err| value_err("box", err.to_string()))?;
        self.solve_config()?
            .validate()
            .map_err(|err| value_err("solve", err.to_string()))?;
        for c in &self.probe_cells {
            c.validate().map_err(|err| value_err("probe.cells", err.to_string()))?;
        }
        if self.probe_cells.is_empty() {
            return Err(value_err("probe.cells", "need at least one cell"));
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            return Err(value_err("sweep.betas", "need finite nonnegative values"));
        }
        if self.amplitudes.is_empty() || self.amplitudes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(value_err("sweep.amplitudes", "need finite positive values"));
        }
        if self.levels == 0 {
            return Err(value_err("sweep.levels", "need at least one level"));
        }
        Ok(())
    }

    /// Messages worth printing before a run.
    pub fn notices(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.spec.theorem_regime() {
            out.push(format!(
                "notice: k = {} and l = {} give theorem_regime=false; the operator is elliptic and \
                 concave, but the interior estimate is only claimed for k >= l + 2",
                self.spec.k, self.spec.l
            ));
        }
        out
    }

    pub fn chart_box(&self) -> ChartBox {
        ChartBox::annular(self.spec.n, self.angular, self.radial)
    }

    /// Coarsest grid.
    pub fn grid(&self) -> Result<Grid> {
        Grid::uniform(PolarChart::new(self.spec.n)?, self.chart_box(), self.nodes)
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        let s = &self.solve;
        Ok(SolveConfig {
            continuation_steps: s.continuation_steps,
            newton_tol: s.newton_tol,
            max_newton: s.max_newton,
            backtrack: s.backtrack,
            cone_margin: s.cone_margin,
            linear_tol: s.linear_tol,
            max_linear: s.max_linear,
            init_c: s.init_c,
            ..SolveConfig::new(self.spec, self.grid()?, self.rhs.clone())
        })
    }

    /// Canonical text form with every key; parsing it gives back `self`.
    pub fn to_text(&self) -> String {
        let mut t = String::from("# resolved hessquot configuration\n");
        let mut put = |k: &str, v: String| t.push_str(&format!("{k} = {v}\n"));
        put("spec.n", self.spec.n.to_string());
        put("spec.k", self.spec.k.to_string());
        put("spec.l", self.spec.l.to_string());
        put("spec.tau", format!("{:?}", self.spec.tau));
        put("box.angular", join(&[self.angular.0, self.angular.1]));
        put("box.radial", join(&[self.radial.0, self.radial.1]));
        put("grid.nodes", self.nodes.to_string());
        put("rhs.amplitude", format!("{:?}", self.rhs.amplitude));
        put("rhs.profile", self.rhs.profile.name().to_string());
        match self.rhs.profile {
            Profile::Constant => {}
            Profile::RadialGaussian { center, width } => {
                put("rhs.center", format!("{center:?}"));
                put("rhs.width", format!("{width:?}"));
            }
            Profile::CosineProduct { strength, wavenumber } => {
                put("rhs.strength", format!("{strength:?}"));
                put("rhs.wavenumber", format!("{wavenumber:?}"));
            }
        }
        put("rhs.mu", format!("{:?}", self.rhs.mu));
        put("rhs.s", format!("{:?}", self.rhs.s));
        let s = &self.solve;
        put("solve.continuation_steps", s.continuation_steps.to_string());
        put("solve.newton_tol", format!("{:?}", s.newton_tol));
        put("solve.max_newton", s.max_newton.to_string());
        put("solve.backtrack", format!("{:?}", s.backtrack));
        put("solve.cone_margin", format!("{:?}", s.cone_margin));
        put("solve.linear_tol", format!("{:?}", s.linear_tol));
        put("solve.max_linear", s.max_linear.to_string());
        put(
            "solve.init_c",
            s.init_c.map_or("auto".to_string(), |c| format!("{c:?}")),
        );
        put(
            "probe.cells",
            self.probe_cells
                .iter()
                .map(|c| format!("{:?}/{:?}/{:?}", c.beta, c.a, c.big_a))
                .collect::<Vec<_>>()
                .join(", "),
        );
        put("sweep.betas", join(&self.betas));
        put("sweep.amplitudes", join(&self.amplitudes));
        put("sweep.levels", self.levels.to_string());
        put("estimate.norm", self.norm.name().to_string());
        if let Some(dir) = &self.output_dir {
            put("output.dir", dir.display().to_string());
        }
        t
    }

    /// SHA-256 of [`RunConfig::to_text`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// Writes [`RESOLVED_NAME`] into `dir`, creating it if needed.
    pub fn write_resolved(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(RESOLVED_NAME);
        fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// `beta/a/A, beta/a/A, ...`
fn parse_cells(v: &str) -> Result<Vec<ProbeConfig>> {
    v.split(',')
        .map(|cell| {
            let nums = cell
                .trim()
                .split('/')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| value_err("probe.cells", format!("cannot parse `{}`", cell.trim())))?;
            match nums[..] {
                [beta, a, big_a] => {
                    ProbeConfig::new(beta, a, big_a).map_err(|err| value_err("probe.cells", err.to_string()))
                }
                _ => Err(value_err("probe.cells", format!("`{}` is not beta/a/A", cell.trim()))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "spec.n = 2\nspec.k = 2\nspec.l = 0\ngrid.nodes = 13\nrhs.amplitude = 1\n";

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn minimal_config_gets_baseline_defaults() {
        assert_eq!(parse(MINIMAL).unwrap(), RunConfig::baseline());
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::baseline();
        c.rhs.profile = Profile::RadialGaussian {
            center: 1.1,
            width: 0.3,
        };
        c.solve.init_c = Some(0.7);
        c.output_dir = Some(PathBuf::from("out/run one"));
        let back = parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn errors_carry_line_or_key() {
        match parse(&format!("{MINIMAL}spec.tua = 1\n")) {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        match parse(&format!("{MINIMAL}\nnot a pair\n")) {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        match parse(&format!("{MINIMAL}spec.tau = 0.5\n")) {
            Err(Error::ConfigValue { key, .. }) => assert_eq!(key, "spec.tau"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse(&format!("{MINIMAL}spec.n = 3\n")),
            Err(Error::ConfigParse { line: 6, .. })
        ));
        assert!(matches!(
            parse("spec.n = 2\nspec.k = 2\nspec.l = 0\nrhs.amplitude = 1\n"),
            Err(Error::ConfigValue { .. })
        ));
    }

    #[test]
    fn k_equal_l_plus_one_is_accepted_with_notice() {
        let c = parse(&MINIMAL.replace("spec.l = 0", "spec.l = 1")).unwrap();
        assert!(!c.spec.theorem_regime());
        assert_eq!(c.notices().len(), 1);
        assert!(parse(MINIMAL).unwrap().notices().is_empty());
    }
}
