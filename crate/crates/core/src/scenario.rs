//! Scenario configuration, scenario files and grid axes.
//!
//! Scenario files are TOML. Every key is optional and falls back to the
//! defaults below; unknown keys are rejected.
//!
//! ```toml
//! n = 15
//! m = 5
//! structure = "k5"            # "k2", "k5" or "file:<matrix path>"
//! incentive = "altruistic"    # or "alpha=<v>", or the `alpha` / `beta` keys
//! strategy = "utility"        # "utility", "interdependence" or "benchmark"
//! tau = 25
//! horizon = 500
//! replications = 800
//! sigma = 0.05
//! capacity = 5                # or `capacities = [5, 5, 5, 5, 5]`
//! seed = 1
//! out = "results"
//!
//! [grid]
//! structures = ["k2", "k5"]
//! incentives = ["individualistic", "balanced", "altruistic"]
//! strategies = ["utility", "interdependence", "benchmark"]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::auction::AuctionStrategy;
use crate::error::{Error, Result};
use crate::landscape::{InteractionMatrix, StructureKind, ENUMERATION_LIMIT};
use crate::organization::IncentiveScheme;

pub const DEFAULT_N: usize = 15;
pub const DEFAULT_M: usize = 5;
pub const DEFAULT_TAU: u32 = 25;
pub const DEFAULT_CAPACITY: usize = 5;
pub const DEFAULT_SIGMA: f64 = 0.05;
pub const DEFAULT_HORIZON: u32 = 500;
pub const DEFAULT_REPLICATIONS: u64 = 800;
pub const DEFAULT_SEED: u64 = 1;
pub const BLOCK_SIZE: usize = 3;

/// Self-organization strategy of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Utility,
    Interdependence,
    /// Mirrored allocation, no auctions.
    Benchmark,
}

impl Strategy {
    pub fn auction(self) -> Option<AuctionStrategy> {
        match self {
            Strategy::Utility => Some(AuctionStrategy::Utility),
            Strategy::Interdependence => Some(AuctionStrategy::Interdependence),
            Strategy::Benchmark => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Utility => "utility",
            Strategy::Interdependence => "interdependence",
            Strategy::Benchmark => "benchmark",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "utility" => Ok(Strategy::Utility),
            "interdependence" => Ok(Strategy::Interdependence),
            "benchmark" => Ok(Strategy::Benchmark),
            other => Err(format!(
                "unknown strategy `{other}` (expected utility, interdependence or benchmark)"
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Interaction structure: stylized or loaded from a matrix file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Structure {
    Stylized(StructureKind),
    File(PathBuf),
}

impl Structure {
    pub fn matrix(&self, n: usize) -> Result<InteractionMatrix> {
        match self {
            Structure::Stylized(kind) => InteractionMatrix::stylized(*kind, n, BLOCK_SIZE),
            Structure::File(path) => {
                let matrix = InteractionMatrix::load(path)?;
                if matrix.n() != n {
                    return Err(Error::Config(format!(
                        "matrix file {} has n = {}, scenario has n = {n}",
                        path.display(),
                        matrix.n()
                    )));
                }
                Ok(matrix)
            }
        }
    }

    fn resolve_relative(self, base: &Path) -> Self {
        match self {
            Structure::File(p) if p.is_relative() => Structure::File(base.join(p)),
            other => other,
        }
    }
}

impl FromStr for Structure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "k2" => Ok(Structure::Stylized(StructureKind::DecomposableK2)),
            "k5" => Ok(Structure::Stylized(StructureKind::NondecomposableK5)),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Structure::File(PathBuf::from(path))),
                _ => Err(format!("unknown structure `{s}` (expected k2, k5 or file:<path>)")),
            },
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::Stylized(kind) => f.write_str(kind.short_name()),
            Structure::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

impl Serialize for Structure {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `individualistic`, `balanced`, `altruistic` or `alpha=<v>`.
pub fn parse_incentive(s: &str) -> std::result::Result<IncentiveScheme, String> {
    match s {
        "individualistic" => Ok(IncentiveScheme::INDIVIDUALISTIC),
        "balanced" => Ok(IncentiveScheme::BALANCED),
        "altruistic" => Ok(IncentiveScheme::ALTRUISTIC),
        _ => {
            let value = s.strip_prefix("alpha=").ok_or_else(|| {
                format!("unknown incentive `{s}` (expected individualistic, balanced, altruistic or alpha=<v>)")
            })?;
            let alpha: f64 = value
                .parse()
                .map_err(|_| format!("alpha `{value}` is not a number"))?;
            // Range checks happen during validation so they are reported with the rest.
            Ok(IncentiveScheme {
                alpha,
                beta: 1.0 - alpha,
            })
        }
    }
}

pub fn incentive_label(scheme: &IncentiveScheme) -> String {
    match scheme.name() {
        Some(name) => name.to_string(),
        None => format!("alpha={}", scheme.alpha),
    }
}

/// Everything needed to run one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub m: usize,
    pub structure: Structure,
    pub incentive: IncentiveScheme,
    pub strategy: Strategy,
    pub tau: u32,
    pub horizon: u32,
    pub replications: u64,
    pub sigma: f64,
    pub capacities: Vec<usize>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n: DEFAULT_N,
            m: DEFAULT_M,
            structure: Structure::Stylized(StructureKind::DecomposableK2),
            incentive: IncentiveScheme::INDIVIDUALISTIC,
            strategy: Strategy::Utility,
            tau: DEFAULT_TAU,
            horizon: DEFAULT_HORIZON,
            replications: DEFAULT_REPLICATIONS,
            sigma: DEFAULT_SIGMA,
            capacities: vec![DEFAULT_CAPACITY; DEFAULT_M],
            seed: DEFAULT_SEED,
        }
    }
}

impl ScenarioConfig {
    /// Human-readable cell label, e.g. `k5/altruistic/utility`.
    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.structure, incentive_label(&self.incentive), self.strategy)
    }

    pub fn with_uniform_capacity(mut self, capacity: usize) -> Self {
        self.capacities = vec![capacity; self.m];
        self
    }

    /// Checks every invariant and reports all violations together. Custom
    /// matrix files are loaded as part of the check.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.n == 0 {
            problems.push("n must be positive".to_string());
        }
        if self.n > ENUMERATION_LIMIT {
            problems.push(format!("n = {} exceeds the enumeration limit of {ENUMERATION_LIMIT}", self.n));
        }
        if self.m == 0 {
            problems.push("m must be positive".to_string());
        } else if !self.n.is_multiple_of(self.m) {
            problems.push(format!("n = {} is not divisible by m = {}", self.n, self.m));
        }
        if self.tau < 2 {
            problems.push(format!("tau must be at least 2, got {}", self.tau));
        }
        if self.horizon < 1 {
            problems.push("horizon must be at least 1".to_string());
        }
        if self.replications < 1 {
            problems.push("replications must be at least 1".to_string());
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            problems.push(format!("sigma must be finite and non-negative, got {}", self.sigma));
        }
        if let Err(e) = self.incentive.validate() {
            problems.push(e);
        }
        if self.m == 1 && self.incentive.alpha != 1.0 {
            problems.push("a single agent has no residual decisions; alpha must be 1 when m = 1".to_string());
        }
        if self.capacities.len() != self.m {
            problems.push(format!(
                "{} capacities given for {} agents",
                self.capacities.len(),
                self.m
            ));
        } else if self.m > 0 && self.n.is_multiple_of(self.m) {
            let share = self.n / self.m;
            for (agent, &c) in self.capacities.iter().enumerate() {
                if c < share {
                    problems.push(format!("agent {agent} capacity {c} is below the initial share {share}"));
                }
            }
        }
        if self.n > 0 && self.n <= ENUMERATION_LIMIT {
            if let Err(e) = self.structure.matrix(self.n) {
                problems.push(e.to_string());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(problems))
        }
    }
}

/// Axes of a scenario grid; cells are enumerated structures-major, then
/// incentives, then strategies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridAxes {
    pub structures: Vec<Structure>,
    pub incentives: Vec<IncentiveScheme>,
    pub strategies: Vec<Strategy>,
}

impl GridAxes {
    /// Two structures, three incentive schemes, both auction strategies
    /// plus the benchmark: 18 cells.
    pub fn standard() -> Self {
        GridAxes {
            structures: vec![
                Structure::Stylized(StructureKind::DecomposableK2),
                Structure::Stylized(StructureKind::NondecomposableK5),
            ],
            incentives: vec![
                IncentiveScheme::INDIVIDUALISTIC,
                IncentiveScheme::BALANCED,
                IncentiveScheme::ALTRUISTIC,
            ],
            strategies: vec![Strategy::Utility, Strategy::Interdependence, Strategy::Benchmark],
        }
    }

    pub fn single(config: &ScenarioConfig) -> Self {
        GridAxes {
            structures: vec![config.structure.clone()],
            incentives: vec![config.incentive],
            strategies: vec![config.strategy],
        }
    }

    pub fn len(&self) -> usize {
        self.structures.len() * self.incentives.len() * self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One scenario per cell, inheriting everything else from `base`.
    pub fn cells(&self, base: &ScenarioConfig) -> Vec<ScenarioConfig> {
        let mut cells = Vec::with_capacity(self.len());
        for structure in &self.structures {
            for incentive in &self.incentives {
                for strategy in &self.strategies {
                    cells.push(ScenarioConfig {
                        structure: structure.clone(),
                        incentive: *incentive,
                        strategy: *strategy,
                        ..base.clone()
                    });
                }
            }
        }
        cells
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    structures: Option<Vec<String>>,
    incentives: Option<Vec<String>>,
    strategies: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n: Option<usize>,
    m: Option<usize>,
    structure: Option<String>,
    incentive: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
    strategy: Option<String>,
    tau: Option<u32>,
    horizon: Option<u32>,
    replications: Option<u64>,
    sigma: Option<f64>,
    capacity: Option<usize>,
    capacities: Option<Vec<usize>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    grid: Option<RawGrid>,
}

/// A parsed scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub config: ScenarioConfig,
    pub grid: Option<GridAxes>,
    pub out: Option<PathBuf>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses TOML text. Relative matrix paths resolve against the file's
    /// directory. Syntax and key errors carry a line number; value errors
    /// are collected and reported together.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(1);
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut problems = Vec::new();
        let mut config = ScenarioConfig::default();

        if let Some(n) = raw.n {
            config.n = n;
        }
        if let Some(m) = raw.m {
            config.m = m;
        }
        if let Some(s) = raw.structure {
            match s.parse::<Structure>() {
                Ok(st) => config.structure = st.resolve_relative(base),
                Err(e) => problems.push(e),
            }
        }
        match (raw.incentive, raw.alpha, raw.beta) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                problems.push("give either `incentive` or `alpha`/`beta`, not both".to_string())
            }
            (Some(name), None, None) => match parse_incentive(&name) {
                Ok(s) => config.incentive = s,
                Err(e) => problems.push(e),
            },
            (None, Some(alpha), beta) => {
                config.incentive = IncentiveScheme {
                    alpha,
                    beta: beta.unwrap_or(1.0 - alpha),
                }
            }
            (None, None, Some(beta)) => {
                config.incentive = IncentiveScheme {
                    alpha: 1.0 - beta,
                    beta,
                }
            }
            (None, None, None) => {}
        }
        if let Some(s) = raw.strategy {
            match s.parse() {
                Ok(st) => config.strategy = st,
                Err(e) => problems.push(e),
            }
        }
        if let Some(v) = raw.tau {
            config.tau = v;
        }
        if let Some(v) = raw.horizon {
            config.horizon = v;
        }
        if let Some(v) = raw.replications {
            config.replications = v;
        }
        if let Some(v) = raw.sigma {
            config.sigma = v;
        }
        if let Some(v) = raw.seed {
            config.seed = v;
        }
        config.capacities = match (raw.capacity, raw.capacities) {
            (Some(_), Some(_)) => {
                problems.push("give either `capacity` or `capacities`, not both".to_string());
                vec![DEFAULT_CAPACITY; config.m]
            }
            (Some(c), None) => vec![c; config.m],
            (None, Some(cs)) => cs,
            (None, None) => vec![DEFAULT_CAPACITY; config.m],
        };

        let grid = raw.grid.map(|g| {
            let mut axes = GridAxes::single(&config);
            if let Some(list) = g.structures {
                axes.structures = list
                    .iter()
                    .filter_map(|s| match s.parse::<Structure>() {
                        Ok(st) => Some(st.resolve_relative(base)),
                        Err(e) => {
                            problems.push(e);
                            None
                        }
                    })
                    .collect();
            }
            if let Some(list) = g.incentives {
                axes.incentives = list
                    .iter()
                    .filter_map(|s| parse_incentive(s).map_err(|e| problems.push(e)).ok())
                    .collect();
            }
            if let Some(list) = g.strategies {
                axes.strategies = list
                    .iter()
                    .filter_map(|s| s.parse().map_err(|e| problems.push(e)).ok())
                    .collect();
            }
            if axes.is_empty() {
                problems.push("grid axes must not be empty".to_string());
            }
            axes
        });

        if problems.is_empty() {
            Ok(ScenarioFile {
                config,
                grid,
                out: raw.out.map(|o| base.join(o)),
            })
        } else {
            Err(Error::Invalid(problems))
        }
    }

    /// Validates the base configuration and every grid cell.
    pub fn validate(&self) -> Result<()> {
        let cells = match &self.grid {
            Some(axes) => axes.cells(&self.config),
            None => vec![self.config.clone()],
        };
        let mut problems = Vec::new();
        for cell in &cells {
            if let Err(Error::Invalid(list)) = cell.validate() {
                for p in list {
                    let p = if cells.len() > 1 { format!("{}: {p}", cell.label()) } else { p };
                    if !problems.contains(&p) {
                        problems.push(p);
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioFile> {
        ScenarioFile::parse(text, Path::new("scenario.toml"))
    }

    #[test]
    fn defaults_match_model_parameters() {
        let f = parse("").unwrap();
        let c = &f.config;
        assert_eq!((c.n, c.m, c.tau, c.horizon, c.replications), (15, 5, 25, 500, 800));
        assert_eq!(c.sigma, 0.05);
        assert_eq!(c.capacities, vec![5; 5]);
        assert!(f.config.validate().is_ok());
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        match parse("n = 15\nbogus = 3\n") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_toml_has_line() {
        match parse("n = 15\nm = \n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn all_violations_reported() {
        let f = parse("tau = 0\nalpha = 0.6\nbeta = 0.6\nsigma = -1.0\n").unwrap();
        match f.validate() {
            Err(Error::Invalid(list)) => {
                assert!(list.iter().any(|p| p.contains("tau")));
                assert!(list.iter().any(|p| p.contains("sum to 1")));
                assert!(list.iter().any(|p| p.contains("sigma")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_section() {
        let f = parse(
            "[grid]\nstructures = [\"k2\", \"k5\"]\nincentives = [\"balanced\", \"alpha=0.3\"]\nstrategies = [\"utility\"]\n",
        )
        .unwrap();
        let axes = f.grid.unwrap();
        assert_eq!(axes.len(), 4);
        assert_eq!(axes.incentives[1].alpha, 0.3);
        assert!(parse("[grid]\nstrategies = []\n").is_err());
        assert!(parse("[grid]\nstrategies = [\"greedy\"]\n").is_err());
    }

    #[test]
    fn standard_grid_has_eighteen_cells() {
        let axes = GridAxes::standard();
        let cells = axes.cells(&ScenarioConfig::default());
        assert_eq!(cells.len(), 18);
        assert_eq!(cells[0].label(), "k2/individualistic/utility");
        assert_eq!(cells[17].label(), "k5/altruistic/benchmark");
        assert!(cells.iter().all(|c| c.validate().is_ok()));
    }

    #[test]
    fn single_agent_requires_alpha_one() {
        let c = ScenarioConfig {
            m: 1,
            capacities: vec![15],
            incentive: IncentiveScheme::BALANCED,
            ..ScenarioConfig::default()
        };
        assert!(c.validate().is_err());
        let c = ScenarioConfig {
            incentive: IncentiveScheme::INDIVIDUALISTIC,
            ..c
        };
        assert!(c.validate().is_ok());
    }

    #[test]
    fn structure_strings() {
        assert_eq!("k2".parse::<Structure>().unwrap().to_string(), "k2");
        assert_eq!(
            "file:m.txt".parse::<Structure>().unwrap(),
            Structure::File(PathBuf::from("m.txt"))
        );
        assert!("k3".parse::<Structure>().is_err());
        assert!("file:".parse::<Structure>().is_err());
    }

    #[test]
    fn relative_matrix_path_resolves_against_file() {
        let f = ScenarioFile::parse("structure = \"file:m.txt\"\n", Path::new("/tmp/x/s.toml")).unwrap();
        assert_eq!(f.config.structure, Structure::File(PathBuf::from("/tmp/x/m.txt")));
    }

    #[test]
    fn incentive_keys() {
        assert_eq!(parse("incentive = \"altruistic\"").unwrap().config.incentive, IncentiveScheme::ALTRUISTIC);
        assert_eq!(parse("alpha = 0.5").unwrap().config.incentive, IncentiveScheme::BALANCED);
        assert!(parse("incentive = \"balanced\"\nalpha = 0.5").is_err());
        assert!(parse("incentive = \"selfish\"").is_err());
    }
}
