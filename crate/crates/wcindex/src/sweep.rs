//! Parameter sweeps over generated corpora.
//!
//! A sweep builds indexes across a `(text, beta, k)` grid, records their
//! space and query counters, and checks every built row against the
//! proven space bound `|C| * sum_{j=0..k} H^j` (with `H` the observed
//! maximum light height). Bound violations abort the sweep — they would
//! mean a construction bug, not an interesting data point. Guard
//! exhaustion and invalid parameter combinations are recorded as
//! row-level refusals and the sweep continues.
//!
//! Corpora are generated from a seeded RNG: uniform draws, Zipf draws
//! (skewed symbol frequencies), and periodic strings (`aaa...`,
//! `ababab...`) which maximize suffix-tree height. The same seed always
//! reproduces the same report, bit for bit.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{Error, Result};
use crate::index::{build_index_guarded, IndexKind, IndexVariant};
use crate::text::{GapPattern, IndexedText, TextHandle};

/// One generated corpus text. Alphabets use the first `sigma` lowercase
/// letters (`sigma <= 26`).
#[derive(Clone, Debug, PartialEq)]
pub enum TextSpec {
    /// Independent uniform symbol draws.
    Uniform { n: usize, sigma: usize },
    /// Zipf-distributed symbol draws with the given exponent: rank-1
    /// symbols dominate, stressing heavy-path skew.
    Zipf { n: usize, sigma: usize, exponent: f64 },
    /// The unary string `aaaa...` (maximal suffix-tree height).
    Runs { n: usize },
    /// The period-2 string `ababab...`.
    Alternating { n: usize },
}

impl TextSpec {
    pub fn name(&self) -> String {
        match self {
            TextSpec::Uniform { n, sigma } => format!("uniform-{n}x{sigma}"),
            TextSpec::Zipf { n, sigma, exponent } => format!("zipf-{n}x{sigma}-s{exponent}"),
            TextSpec::Runs { n } => format!("runs-{n}"),
            TextSpec::Alternating { n } => format!("alternating-{n}"),
        }
    }
}

/// Draws one text according to `spec`.
pub fn generate_text(spec: &TextSpec, rng: &mut ChaCha8Rng) -> IndexedText {
    let letter = |i: usize| b'a' + (i % 26) as u8;
    let bytes: Vec<u8> = match *spec {
        TextSpec::Uniform { n, sigma } => {
            let sigma = sigma.clamp(1, 26);
            (0..n).map(|_| letter(rng.random_range(0..sigma))).collect()
        }
        TextSpec::Zipf { n, sigma, exponent } => {
            let sigma = sigma.clamp(1, 26);
            if sigma == 1 {
                vec![b'a'; n]
            } else {
                let dist = Zipf::new(sigma as f64, exponent)
                    .expect("sigma >= 2 and a finite exponent form a valid Zipf");
                (0..n)
                    .map(|_| letter(dist.sample(rng) as usize - 1))
                    .collect()
            }
        }
        TextSpec::Runs { n } => vec![b'a'; n],
        TextSpec::Alternating { n } => (0..n).map(|i| letter(i % 2)).collect(),
    };
    IndexedText::from_bytes(&bytes)
}

/// The parameter grid driven over every corpus text.
#[derive(Clone, Debug)]
pub struct ParamGrid {
    pub betas: Vec<usize>,
    pub ks: Vec<usize>,
    /// Random wildcard-only queries sampled per built row.
    pub queries_per_row: usize,
    /// Construction guard handed to every build (`None` = default).
    pub guard: Option<u64>,
    /// Also emit one `simple` and one `art-linear` row per text.
    pub baselines: bool,
}

impl Default for ParamGrid {
    fn default() -> ParamGrid {
        ParamGrid {
            betas: vec![1, 2],
            ks: vec![0, 1, 2],
            queries_per_row: 8,
            guard: None,
            baselines: true,
        }
    }
}

/// Measurements from one successfully built row.
#[derive(Clone, Debug, PartialEq)]
pub struct RowMetrics {
    pub stored_strings: u64,
    pub vertex_count: usize,
    pub bound_value: u64,
    pub bound_satisfied: bool,
    pub mean_lcp_queries: f64,
    pub max_branch_events: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowOutcome {
    Built(RowMetrics),
    /// The build was refused (guard exhaustion, parameter range); the
    /// sweep records why and moves on.
    Refused { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub text: String,
    pub variant: &'static str,
    pub beta: usize,
    pub k: usize,
    pub n: usize,
    pub sigma: usize,
    pub outcome: RowOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Renders the report as CSV: a `# seed=` comment row, a fixed
    /// header, then one row per grid point. Refused rows leave the
    /// metric columns empty and explain themselves in `status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(
            out,
            "text,variant,beta,k,n,sigma,stored_strings,vertex_count,\
             bound_value,bound_satisfied,mean_lcp_queries,max_branch_events,status"
        );
        for row in &self.rows {
            let head = format!(
                "{},{},{},{},{},{}",
                row.text, row.variant, row.beta, row.k, row.n, row.sigma
            );
            match &row.outcome {
                RowOutcome::Built(m) => {
                    let _ = writeln!(
                        out,
                        "{head},{},{},{},{},{:.3},{},ok",
                        m.stored_strings,
                        m.vertex_count,
                        m.bound_value,
                        m.bound_satisfied,
                        m.mean_lcp_queries,
                        m.max_branch_events
                    );
                }
                RowOutcome::Refused { reason } => {
                    let _ = writeln!(out, "{head},,,,,,,refused: {}", reason.replace(',', ";"));
                }
            }
        }
        out
    }
}

/// Runs the grid over every text, returning one row per grid point.
/// The `seed` drives both corpus generation and query sampling.
pub fn run_sweep(seed: u64, texts: &[TextSpec], grid: &ParamGrid) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for spec in texts {
        let text: TextHandle = Arc::new(generate_text(spec, &mut rng));
        if text.n() == 0 {
            return Err(Error::Param(format!("corpus text {} is empty", spec.name())));
        }
        if grid.baselines {
            for variant in [IndexVariant::Simple, IndexVariant::ArtLinear { chi: None }] {
                rows.push(grid_row(spec.name(), &text, variant, grid, &mut rng)?);
            }
        }
        for &beta in &grid.betas {
            for &k in &grid.ks {
                let variant = IndexVariant::Tradeoff { beta, k, opt: Some(0) };
                rows.push(grid_row(spec.name(), &text, variant, grid, &mut rng)?);
            }
        }
    }
    Ok(SweepReport { seed, rows })
}

fn grid_row(
    name: String,
    text: &TextHandle,
    variant: IndexVariant,
    grid: &ParamGrid,
    rng: &mut ChaCha8Rng,
) -> Result<SweepRow> {
    let (variant_name, beta, k) = match variant {
        IndexVariant::Simple => ("simple", 0, 0),
        IndexVariant::ArtLinear { .. } => ("art-linear", 0, 0),
        IndexVariant::Tradeoff { beta, k, .. } => ("tradeoff", beta, k),
        IndexVariant::LinearTime { .. } => ("linear-time", 0, 0),
    };
    let mut row = SweepRow {
        text: name,
        variant: variant_name,
        beta,
        k,
        n: text.n(),
        sigma: text.sigma(),
        outcome: RowOutcome::Refused { reason: String::new() },
    };
    let idx = match build_index_guarded(text, variant, grid.guard) {
        Ok(idx) => idx,
        Err(Error::Guard { stored, guard }) => {
            row.outcome = RowOutcome::Refused {
                reason: format!("guard exhausted: {stored} strings exceed {guard}"),
            };
            return Ok(row);
        }
        Err(Error::BetaRange { beta, sigma }) => {
            row.outcome = RowOutcome::Refused {
                reason: format!("beta {beta} outside [1, {sigma})"),
            };
            return Ok(row);
        }
        Err(e) => return Err(e),
    };

    // Space accounting. For the plain suffix-tree variants the stored
    // set is the n+1 suffixes and the bound is trivially tight.
    let (stored, vertices, bound_value) = match &idx.kind {
        IndexKind::Tradeoff(ti) => {
            let s = ti.wt.stats();
            let h = s.lightheight_max as u128;
            let set = s.per_level_strings[0] as u128;
            let sum: u128 = (0..=k).map(|j| h.pow(j as u32)).sum();
            (
                s.stored_strings,
                ti.wt.trie().vertex_count(),
                u64::try_from(set.saturating_mul(sum)).unwrap_or(u64::MAX),
            )
        }
        IndexKind::Simple { tree } => {
            let n1 = (text.n() + 1) as u64;
            (n1, tree.vertex_count(), n1)
        }
        IndexKind::ArtLinear(a) => {
            let n1 = (text.n() + 1) as u64;
            (n1, a.tree.vertex_count(), n1)
        }
        IndexKind::LinearTime { .. } => unreachable!("not part of the sweep grid"),
    };
    let bound_satisfied = stored <= bound_value;
    if !bound_satisfied {
        return Err(Error::Param(format!(
            "space bound violated on {}: {stored} stored strings exceed {bound_value} \
             (variant={variant_name}, beta={beta}, k={k})",
            row.text
        )));
    }
    if variant_name == "tradeoff" && k == 0 && stored != (text.n() + 1) as u64 {
        return Err(Error::Param(format!(
            "a zero-level tree must store exactly the n+1 suffixes, found {stored}"
        )));
    }

    // Counter sampling: random in-budget wildcard-only queries.
    let mut total_lcp = 0usize;
    let mut max_branch = 0usize;
    for _ in 0..grid.queries_per_row {
        let p = random_wildcard_pattern(text, k, rng);
        let (_, qs) = idx.query(&p)?;
        total_lcp += qs.lcp_queries;
        max_branch = max_branch.max(qs.branch_events);
        if variant_name == "tradeoff" {
            let qbound: usize = (0..=p.gap_count()).map(|i| beta.pow(i as u32)).sum();
            if qs.lcp_queries > qbound {
                return Err(Error::Param(format!(
                    "query bound violated on {}: {} LCP queries exceed {qbound} \
                     (pattern {}, beta={beta})",
                    row.text,
                    qs.lcp_queries,
                    p.render()
                )));
            }
        }
    }
    let mean_lcp_queries = if grid.queries_per_row == 0 {
        0.0
    } else {
        total_lcp as f64 / grid.queries_per_row as f64
    };

    row.outcome = RowOutcome::Built(RowMetrics {
        stored_strings: stored,
        vertex_count: vertices,
        bound_value,
        bound_satisfied,
        mean_lcp_queries,
        max_branch_events: max_branch,
    });
    Ok(row)
}

/// Samples a wildcard-only pattern from the text itself: a short window
/// with up to `jmax` interior symbols blanked, so it always matches at
/// least once and stays within the row's budget.
fn random_wildcard_pattern(
    text: &TextHandle,
    jmax: usize,
    rng: &mut ChaCha8Rng,
) -> GapPattern {
    let n = text.n();
    let len = rng.random_range(1..=n.min(7));
    let start = rng.random_range(1..=n - len + 1);
    let mut subs = vec![Vec::new()];
    let mut gaps = Vec::new();
    let mut used = 0;
    for off in 0..len {
        let interior = off > 0 && off + 1 < len;
        if interior && off % 2 == 1 && used < jmax {
            gaps.push((1, 1));
            subs.push(Vec::new());
            used += 1;
        } else {
            subs.last_mut().unwrap().push(text.at(start + off));
        }
    }
    GapPattern::new(subs, gaps).expect("sampled windows form valid patterns")
}
