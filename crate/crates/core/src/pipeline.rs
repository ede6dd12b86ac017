//! End-to-end registration: optional pruning, then a solver.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::bnb::{bnb_register, DEFAULT_MIN_HALF_SIDE};
use crate::error::{Error, Result};
use crate::fmp::fmp_prune;
use crate::geometry::{InlierConfig, MatchSet, Pose4DOF};
use crate::io::{fmt_real, parse_key_values, parse_point, parse_real, KeyValue};
use crate::ransac::{ransac_4dof, RansacConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Bnb,
    Ransac,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Bnb => "bnb",
            Method::Ransac => "ransac",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bnb" => Ok(Method::Bnb),
            "ransac" => Ok(Method::Ransac),
            other => Err(Error::Config(format!(
                "unknown method '{other}', expected bnb or ransac"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub inlier: InlierConfig,
    pub method: Method,
    pub fmp: bool,
    pub min_half_side: f64,
    pub seed: u64,
    pub ransac_confidence: f64,
    pub ransac_max_iterations: usize,
}

impl PipelineConfig {
    pub fn new(inlier: InlierConfig) -> Self {
        Self {
            inlier,
            method: Method::Bnb,
            fmp: true,
            min_half_side: DEFAULT_MIN_HALF_SIDE,
            seed: 0,
            ransac_confidence: RansacConfig::DEFAULT_CONFIDENCE,
            ransac_max_iterations: RansacConfig::DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Wall-clock time per stage, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub prune_ms: f64,
    /// Time spent in the solver (branch-and-bound or RANSAC).
    pub solve_ms: f64,
    pub total_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Result of registering one scan pair.
///
/// Serialized as `key = value` lines, in this order:
///
/// | key             | value                                              |
/// |-----------------|----------------------------------------------------|
/// | `method`        | `bnb` or `ransac`                                  |
/// | `epsilon`       | inlier threshold, metres                           |
/// | `min_half_side` | smallest cube half-side the search splits          |
/// | `seed`          | RANSAC seed                                        |
/// | `fmp`           | whether pruning ran                                |
/// | `input_size`    | number of input matches                            |
/// | `pruned_size`   | matches left after pruning                         |
/// | `consensus`     | matches aligned by the returned pose               |
/// | `exact_flag`    | `true` if the consensus is certified optimal       |
/// | `theta_rad`     | rotation about the vertical axis, radians          |
/// | `t`             | translation, three reals                           |
/// | `prune_ms`      | pruning time (omitted without timings)             |
/// | `solve_ms`      | solver time (omitted without timings)              |
/// | `total_ms`      | total time (omitted without timings)               |
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationReport {
    pub method: Method,
    pub epsilon: f64,
    pub min_half_side: f64,
    pub seed: u64,
    pub fmp: bool,
    pub input_size: usize,
    pub pruned_size: usize,
    pub consensus: usize,
    pub exact: bool,
    pub pose: Pose4DOF,
    pub timings: Option<StageTimings>,
}

pub const REPORT_KEYS: [&str; 14] = [
    "method",
    "epsilon",
    "min_half_side",
    "seed",
    "fmp",
    "input_size",
    "pruned_size",
    "consensus",
    "exact_flag",
    "theta_rad",
    "t",
    "prune_ms",
    "solve_ms",
    "total_ms",
];

impl RegistrationReport {
    pub fn to_text(&self, include_timings: bool) -> String {
        let mut lines = vec![
            ("method", self.method.to_string()),
            ("epsilon", fmt_real(self.epsilon)),
            ("min_half_side", fmt_real(self.min_half_side)),
            ("seed", self.seed.to_string()),
            ("fmp", self.fmp.to_string()),
            ("input_size", self.input_size.to_string()),
            ("pruned_size", self.pruned_size.to_string()),
            ("consensus", self.consensus.to_string()),
            ("exact_flag", self.exact.to_string()),
            ("theta_rad", fmt_real(self.pose.theta())),
            (
                "t",
                format!(
                    "{} {} {}",
                    fmt_real(self.pose.t.x),
                    fmt_real(self.pose.t.y),
                    fmt_real(self.pose.t.z)
                ),
            ),
        ];
        if let (true, Some(t)) = (include_timings, self.timings) {
            lines.push(("prune_ms", format!("{:.3}", t.prune_ms)));
            lines.push(("solve_ms", format!("{:.3}", t.solve_ms)));
            lines.push(("total_ms", format!("{:.3}", t.total_ms)));
        }
        lines
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        Self::from_entries(&parse_key_values(text, path)?, path)
    }

    fn from_entries(entries: &[KeyValue], path: &Path) -> Result<Self> {
        let get = |key: &str| -> Result<&KeyValue> {
            entries
                .iter()
                .find(|e| e.key == key)
                .ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    message: format!("missing key '{key}'"),
                })
        };
        let parse_err = |e: &KeyValue, what: &str| Error::Parse {
            path: path.to_path_buf(),
            line: e.line,
            message: format!("expected {what} for '{}', got '{}'", e.key, e.value),
        };
        let count = |key: &str| -> Result<usize> {
            let e = get(key)?;
            e.value.parse().map_err(|_| parse_err(e, "a count"))
        };
        let flag = |key: &str| -> Result<bool> {
            let e = get(key)?;
            e.value.parse().map_err(|_| parse_err(e, "true or false"))
        };
        let real = |key: &str| -> Result<f64> {
            let e = get(key)?;
            parse_real(&e.value).ok_or_else(|| parse_err(e, "a finite real"))
        };
        let method_entry = get("method")?;
        let method = method_entry
            .value
            .parse()
            .map_err(|_| parse_err(method_entry, "bnb or ransac"))?;
        let seed_entry = get("seed")?;
        let seed = seed_entry
            .value
            .parse()
            .map_err(|_| parse_err(seed_entry, "an unsigned integer"))?;
        let t_entry = get("t")?;
        let t = parse_point(&t_entry.value).ok_or_else(|| parse_err(t_entry, "three reals"))?;
        let timings = if entries.iter().any(|e| e.key == "total_ms") {
            Some(StageTimings {
                prune_ms: real("prune_ms")?,
                solve_ms: real("solve_ms")?,
                total_ms: real("total_ms")?,
            })
        } else {
            None
        };
        Ok(Self {
            method,
            epsilon: real("epsilon")?,
            min_half_side: real("min_half_side")?,
            seed,
            fmp: flag("fmp")?,
            input_size: count("input_size")?,
            pruned_size: count("pruned_size")?,
            consensus: count("consensus")?,
            exact: flag("exact_flag")?,
            pose: Pose4DOF::new(real("theta_rad")?, t),
            timings,
        })
    }
}

/// Prunes (unless disabled) and solves one scan pair.
///
/// The pose maps the first point of every match onto the second.
pub fn register_pair(matches: &MatchSet, cfg: &PipelineConfig) -> Result<RegistrationReport> {
    let started = Instant::now();
    let (pruned, prune_time) = if cfg.fmp {
        let report = fmp_prune(matches, &cfg.inlier);
        (report.kept, report.elapsed)
    } else {
        (matches.clone(), Duration::ZERO)
    };

    let solve_start = Instant::now();
    let (pose, consensus, exact) = match cfg.method {
        Method::Bnb => {
            let sol = bnb_register(&pruned, &cfg.inlier, cfg.min_half_side)?;
            (sol.pose, sol.consensus, sol.exact)
        }
        Method::Ransac => {
            let rc = RansacConfig::new(cfg.inlier)
                .with_seed(cfg.seed)
                .with_confidence(cfg.ransac_confidence)
                .with_max_iterations(cfg.ransac_max_iterations);
            if pruned.len() == 1 && matches.len() > 1 {
                // pruning left a single pair; any pose aligning it is optimal
                let c = pruned.pairs()[0];
                (Pose4DOF::new(0.0, c.q - c.p), 1, false)
            } else {
                let sol = ransac_4dof(&pruned, &rc)?;
                (sol.pose, sol.consensus, false)
            }
        }
    };
    let solve_time = solve_start.elapsed();

    Ok(RegistrationReport {
        method: cfg.method,
        epsilon: cfg.inlier.epsilon(),
        min_half_side: cfg.min_half_side,
        seed: cfg.seed,
        fmp: cfg.fmp,
        input_size: matches.len(),
        pruned_size: pruned.len(),
        consensus,
        exact,
        pose,
        timings: Some(StageTimings {
            prune_ms: ms(prune_time),
            solve_ms: ms(solve_time),
            total_ms: ms(started.elapsed()),
        }),
    })
}

/// Chains pairwise poses into poses in the first scan's frame.
///
/// `pair_poses[k]` maps scan `k + 1` into scan `k`. The result has one more
/// entry than the input: the first scan gets the identity, and scan `k` gets
/// `global[k − 1] ∘ pair_poses[k − 1]` (the pair pose applied first).
pub fn compose_sequence(pair_poses: &[Pose4DOF]) -> Vec<Pose4DOF> {
    let mut global = Vec::with_capacity(pair_poses.len() + 1);
    global.push(Pose4DOF::identity());
    for pair in pair_poses {
        let prev = *global.last().unwrap();
        global.push(prev.after(pair));
    }
    global
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub pairs: Vec<RegistrationReport>,
    /// Pose of every scan in the first scan's frame.
    pub global: Vec<Pose4DOF>,
}

impl SequenceReport {
    pub fn to_text(&self, include_timings: bool) -> String {
        let mut out = String::new();
        for (i, r) in self.pairs.iter().enumerate() {
            out.push_str(&format!("[pair {}]\n", i + 1));
            out.push_str(&r.to_text(include_timings));
            out.push('\n');
        }
        out.push_str("[global]\n");
        for (k, g) in self.global.iter().enumerate() {
            out.push_str(&format!("scan_{k}.theta_rad = {}\n", fmt_real(g.theta())));
            out.push_str(&format!(
                "scan_{k}.t = {} {} {}\n",
                fmt_real(g.t.x),
                fmt_real(g.t.y),
                fmt_real(g.t.z)
            ));
        }
        out
    }
}

/// Registers consecutive scan pairs independently and chains the results.
///
/// `sets[k]` holds matches from scan `k + 1` (first point) to scan `k`
/// (second point). Errors name the failing pair, counting from 1.
pub fn register_sequence(sets: &[MatchSet], cfg: &PipelineConfig) -> Result<SequenceReport> {
    let pairs = sets
        .iter()
        .enumerate()
        .map(|(i, ms)| {
            register_pair(ms, cfg).map_err(|e| Error::Pair {
                index: i + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let poses: Vec<Pose4DOF> = pairs.iter().map(|r| r.pose).collect();
    Ok(SequenceReport {
        global: compose_sequence(&poses),
        pairs,
    })
}
