//! The PMI-based bias measure and its sampling statistics.
//!
//! The bias of a context set C between target sets A and B is
//! `log(p(C|A) / p(C|B))`, estimated by maximum likelihood from the
//! contingency-table cells. When context events are rare relative to
//! non-context events the estimate is close to the log odds ratio, whose
//! standard error is the classic four-reciprocals formula; that yields
//! confidence intervals and a z-test against the null of zero bias.
//! Exponentiating the bias gives the "how many times more likely"
//! interpretation.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cooccur::{ContextTotals, ContingencyTable, CountRow};
use crate::corpus::Vocabulary;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    FAc,
    FAnc,
    FBc,
    FBnc,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::FAc => write!(f, "f_AC"),
            Cell::FAnc => write!(f, "f_AnC"),
            Cell::FBc => write!(f, "f_BC"),
            Cell::FBnc => write!(f, "f_BnC"),
        }
    }
}

#[derive(Debug, Error)]
pub enum BiasError {
    #[error("degenerate cell: {0} is zero and smoothing is disabled")]
    DegenerateCell(Cell),
    #[error("no target events: row {0} has zero total co-occurrences")]
    NoTargetEvents(String),
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),
    #[error("smoothing must be non-negative and finite, got {0}")]
    InvalidSmoothing(f64),
    #[error("standard error must be positive and finite, got {0}")]
    InvalidStandardError(f64),
}

/// How the point estimate is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasMethod {
    /// `log((f_AC/(f_AC+f_AnC)) / (f_BC/(f_BC+f_BnC)))` — the maximum-
    /// likelihood conditional-probability ratio.
    ExactMl,
    /// `log((f_AC * f_BnC) / (f_AnC * f_BC))` — the odds-ratio
    /// approximation, whose sampling theory supplies SE and CI.
    LogOddsRatio,
}

impl fmt::Display for BiasMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasMethod::ExactMl => write!(f, "exact-ml"),
            BiasMethod::LogOddsRatio => write!(f, "log-odds-ratio"),
        }
    }
}

/// Which standard-error formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeMode {
    /// `sqrt(1/f_AC + 1/f_BC + 1/f_AnC + 1/f_BnC)`.
    Full,
    /// `sqrt(1/f_AC + 1/f_BC)`, valid when context events are rare.
    Approx,
}

/// A PMI value for a word or word-list pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmiValue {
    pub value: f64,
    /// True when the joint count was zero; `value` is then negative
    /// infinity rather than a fabricated finite number.
    pub unobserved: bool,
}

/// PMI from raw event counts over a common event space:
/// `log((joint/total) / ((x_events/total) * (y_events/total)))`.
pub fn pmi_from_counts(joint: u64, x_events: u64, y_events: u64, total_events: u64) -> PmiValue {
    if joint == 0 {
        return PmiValue {
            value: f64::NEG_INFINITY,
            unobserved: true,
        };
    }
    let value = ((joint as f64 * total_events as f64) / (x_events as f64 * y_events as f64)).ln();
    PmiValue {
        value,
        unobserved: false,
    }
}

/// List PMI between the centers of `rows` and the context words of
/// `context_words`, over the event space of all windowed co-occurrence
/// pairs summarized by `ctx`.
pub fn list_pmi(
    rows: &[&CountRow],
    context_words: &BTreeSet<String>,
    ctx: &ContextTotals,
    vocab: &Vocabulary,
) -> PmiValue {
    let joint: u64 = rows
        .iter()
        .map(|row| {
            context_words
                .iter()
                .filter_map(|w| row.pair_counts.get(w))
                .sum::<u64>()
        })
        .sum();
    let x_events: u64 = rows.iter().map(|row| row.total_pairs).sum();
    let y_events: u64 = context_words
        .iter()
        .filter_map(|w| vocab.id_of(w))
        .map(|id| ctx.count_of(id))
        .sum();
    pmi_from_counts(joint, x_events, y_events, ctx.total_events())
}

fn smoothed_cells(table: &ContingencyTable, smoothing: f64) -> Result<[f64; 4], BiasError> {
    if !smoothing.is_finite() || smoothing < 0.0 {
        return Err(BiasError::InvalidSmoothing(smoothing));
    }
    let [ac, anc, bc, bnc] = table.cells();
    Ok([
        ac as f64 + smoothing,
        anc as f64 + smoothing,
        bc as f64 + smoothing,
        bnc as f64 + smoothing,
    ])
}

fn require_positive(cells: [f64; 4]) -> Result<(), BiasError> {
    const NAMES: [Cell; 4] = [Cell::FAc, Cell::FAnc, Cell::FBc, Cell::FBnc];
    for (value, name) in cells.into_iter().zip(NAMES) {
        if value <= 0.0 {
            return Err(BiasError::DegenerateCell(name));
        }
    }
    Ok(())
}

fn check_rows(table: &ContingencyTable) -> Result<(), BiasError> {
    if table.total_a() == 0 {
        return Err(BiasError::NoTargetEvents(table.label_a.clone()));
    }
    if table.total_b() == 0 {
        return Err(BiasError::NoTargetEvents(table.label_b.clone()));
    }
    Ok(())
}

/// The maximum-likelihood bias `log((f_AC/(f_AC+f_AnC)) / (f_BC/(f_BC+f_BnC)))`.
pub fn bias_exact(table: &ContingencyTable) -> Result<f64, BiasError> {
    check_rows(table)?;
    if table.f_ac == 0 {
        return Err(BiasError::DegenerateCell(Cell::FAc));
    }
    if table.f_bc == 0 {
        return Err(BiasError::DegenerateCell(Cell::FBc));
    }
    let pa = table.f_ac as f64 / table.total_a() as f64;
    let pb = table.f_bc as f64 / table.total_b() as f64;
    Ok((pa / pb).ln())
}

/// The log odds ratio `log((f_AC*f_BnC) / (f_AnC*f_BC))` after adding
/// `smoothing` to every cell.
pub fn bias_log_odds(table: &ContingencyTable, smoothing: f64) -> Result<f64, BiasError> {
    let cells = smoothed_cells(table, smoothing)?;
    require_positive(cells)?;
    let [ac, anc, bc, bnc] = cells;
    Ok(((ac * bnc) / (anc * bc)).ln())
}

/// Standard error of the log odds ratio on the (optionally smoothed) cells.
pub fn standard_error(
    table: &ContingencyTable,
    mode: SeMode,
    smoothing: f64,
) -> Result<f64, BiasError> {
    let cells = smoothed_cells(table, smoothing)?;
    require_positive(cells)?;
    let [ac, anc, bc, bnc] = cells;
    let variance = match mode {
        SeMode::Full => 1.0 / ac + 1.0 / bc + 1.0 / anc + 1.0 / bnc,
        SeMode::Approx => 1.0 / ac + 1.0 / bc,
    };
    Ok(variance.sqrt())
}

/// Normal-theory confidence interval `bias ± z(level) * se`.
pub fn confidence_interval(bias: f64, se: f64, level: f64) -> Result<(f64, f64), BiasError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(BiasError::InvalidLevel(level));
    }
    if !se.is_finite() || se < 0.0 {
        return Err(BiasError::InvalidStandardError(se));
    }
    let z = stats::normal_quantile((1.0 + level) / 2.0)
        .expect("level in (0,1) maps into the quantile domain");
    Ok((bias - z * se, bias + z * se))
}

/// Two-sided z-test of the bias against the null of zero bias. Returns
/// `(z, p)` with `z = bias/se` and `p = 2*(1 - Phi(|z|))`.
pub fn significance(bias: f64, se: f64) -> Result<(f64, f64), BiasError> {
    if !se.is_finite() || se <= 0.0 {
        return Err(BiasError::InvalidStandardError(se));
    }
    let z = bias / se;
    Ok((z, stats::two_sided_p(z)))
}

/// Quality of the odds-ratio approximation for a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxDiagnostics {
    /// `f_AC / f_AnC`; the approximation wants this small.
    pub ratio_a: f64,
    /// `f_BC / f_BnC`.
    pub ratio_b: f64,
    /// Exact value of `bias_log_odds - bias_exact`, which equals
    /// `log((1 + ratio_a) / (1 + ratio_b))`.
    pub gap: f64,
}

/// Computes the approximation diagnostics for raw (unsmoothed) cells.
pub fn check_approximation(table: &ContingencyTable) -> Result<ApproxDiagnostics, BiasError> {
    check_rows(table)?;
    let ratio_a = table.f_ac as f64 / table.f_anc as f64;
    let ratio_b = table.f_bc as f64 / table.f_bnc as f64;
    Ok(ApproxDiagnostics {
        ratio_a,
        ratio_b,
        gap: ((1.0 + ratio_a) / (1.0 + ratio_b)).ln(),
    })
}

/// The bias on the probability-ratio scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpretedBias {
    /// `exp(bias)`: how many times more likely the context is near A.
    pub ratio: f64,
    /// `100 * (ratio - 1)`: the same as a percentage.
    pub percent_more_likely: f64,
}

/// Converts a log-scale bias into its ratio reading.
pub fn interpret(bias: f64) -> InterpretedBias {
    let ratio = bias.exp();
    InterpretedBias {
        ratio,
        percent_more_likely: 100.0 * (ratio - 1.0),
    }
}

/// Estimation settings for [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub method: BiasMethod,
    pub se_mode: SeMode,
    pub smoothing: f64,
    pub ci_level: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            method: BiasMethod::LogOddsRatio,
            se_mode: SeMode::Full,
            smoothing: 0.0,
            ci_level: 0.95,
        }
    }
}

/// A complete bias estimate for one context set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasEstimate {
    pub context_label: String,
    pub bias: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub z: f64,
    pub p_value: f64,
    /// Filled by a BH pass across a whole report, absent for a lone table.
    pub q_value: Option<f64>,
    pub method: BiasMethod,
    pub smoothing: f64,
    pub ratio_a: f64,
    pub ratio_b: f64,
}

/// Computes bias, SE, CI and significance for one table in one call.
pub fn estimate(
    table: &ContingencyTable,
    opts: &EstimateOptions,
) -> Result<BiasEstimate, BiasError> {
    check_rows(table)?;
    let cells = smoothed_cells(table, opts.smoothing)?;
    require_positive(cells)?;
    let [ac, anc, bc, bnc] = cells;
    let bias = match opts.method {
        BiasMethod::ExactMl => ((ac / (ac + anc)) / (bc / (bc + bnc))).ln(),
        BiasMethod::LogOddsRatio => ((ac * bnc) / (anc * bc)).ln(),
    };
    let se = standard_error(table, opts.se_mode, opts.smoothing)?;
    let (ci_low, ci_high) = confidence_interval(bias, se, opts.ci_level)?;
    let (z, p_value) = significance(bias, se)?;
    Ok(BiasEstimate {
        context_label: table.label_c.clone(),
        bias,
        se,
        ci_low,
        ci_high,
        z,
        p_value,
        q_value: None,
        method: opts.method,
        smoothing: opts.smoothing,
        ratio_a: ac / anc,
        ratio_b: bc / bnc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn table(f_ac: u64, f_anc: u64, f_bc: u64, f_bnc: u64) -> ContingencyTable {
        ContingencyTable {
            f_ac,
            f_anc,
            f_bc,
            f_bnc,
            label_a: "A".to_string(),
            label_b: "B".to_string(),
            label_c: "c".to_string(),
        }
    }

    #[test]
    fn pmi_is_zero_under_independence() {
        // joint/total == (x/total)*(y/total) exactly: 1/4 = (2/4)*(2/4).
        let v = pmi_from_counts(1, 2, 2, 4);
        assert!(!v.unobserved);
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn pmi_flags_unobserved_pairs() {
        let v = pmi_from_counts(0, 5, 7, 100);
        assert!(v.unobserved);
        assert_eq!(v.value, f64::NEG_INFINITY);
    }

    #[test]
    fn pmi_when_lists_always_cooccur() {
        // Four two-token sentences, window 1: "x y", "x y", "u v", "u v".
        // Events: 2 per sentence, 8 total. x-centered: 2, all with y.
        // p(x,y) = p(x) = 1/4, p(y) = 1/4, so PMI = -log p(y) = log 4.
        let v = pmi_from_counts(2, 2, 2, 8);
        assert!(!v.unobserved);
        assert_abs_diff_eq!(v.value, 4.0f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn list_pmi_on_a_counted_corpus_matches_hand_computation() {
        // The same four-sentence corpus, but run through the real counting
        // pipeline instead of hand-assembled counts.
        use crate::cooccur::{count_context_events, count_target_contexts, CooccurConfig};
        use crate::corpus::{build_vocabulary, TokenizedDocument};

        let sentence = |a: &str, b: &str| vec![a.to_string(), b.to_string()];
        let docs = [TokenizedDocument {
            id: "d".into(),
            sentences: vec![
                sentence("x", "y"),
                sentence("x", "y"),
                sentence("u", "v"),
                sentence("u", "v"),
            ],
        }];
        let vocab = build_vocabulary(docs.iter(), 1).unwrap();
        let config = CooccurConfig {
            window_k: 1,
            respect_sentence_boundaries: true,
        };
        let sets = [crate::cooccur::TargetSet::new("X", ["x"])];
        let counts = count_target_contexts(docs.iter(), &sets, &config, &vocab).unwrap();
        let ctx = count_context_events(docs.iter(), &config, &vocab).unwrap();
        assert_eq!(ctx.total_events(), 8);

        let context: BTreeSet<String> = ["y".to_string()].into();
        let v = list_pmi(&[counts.row("X").unwrap()], &context, &ctx, &vocab);
        assert!(!v.unobserved);
        assert_abs_diff_eq!(v.value, 4.0f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn bias_exact_symmetric_table_is_zero() {
        assert_eq!(bias_exact(&table(10, 1000, 10, 1000)).unwrap(), 0.0);
    }

    #[test]
    fn bias_exact_worked_example() {
        // log((30/1030)/(10/2010)) computed independently via the identity
        // bias = log(6) - log((1+0.03)/(1+0.005)).
        let b = bias_exact(&table(30, 1000, 10, 2000)).unwrap();
        let oracle = 6.0f64.ln() - (1.03f64 / 1.005).ln();
        assert_abs_diff_eq!(b, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 1.7671882084975497, epsilon = 1e-12);
    }

    #[test]
    fn bias_exact_negates_under_row_swap() {
        let t = table(30, 1000, 10, 2000);
        let b = bias_exact(&t).unwrap();
        let swapped = bias_exact(&t.swapped()).unwrap();
        assert_abs_diff_eq!(swapped, -b, epsilon = 1e-15);
    }

    #[test]
    fn bias_exact_reports_degenerate_cells_by_name() {
        match bias_exact(&table(0, 10, 5, 10)) {
            Err(BiasError::DegenerateCell(Cell::FAc)) => {}
            other => panic!("expected f_AC degeneracy, got {other:?}"),
        }
        match bias_exact(&table(5, 10, 0, 10)) {
            Err(BiasError::DegenerateCell(Cell::FBc)) => {}
            other => panic!("expected f_BC degeneracy, got {other:?}"),
        }
        assert!(matches!(
            bias_exact(&table(0, 0, 5, 10)),
            Err(BiasError::NoTargetEvents(_))
        ));
    }

    #[test]
    fn bias_log_odds_worked_examples() {
        let b = bias_log_odds(&table(30, 1000, 10, 2000), 0.0).unwrap();
        assert_abs_diff_eq!(b, 6.0f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.791759469228055, epsilon = 1e-12);

        assert_eq!(bias_log_odds(&table(7, 40, 7, 40), 0.0).unwrap(), 0.0);

        // Haldane-Anscombe smoothing of a zero cell.
        let s = bias_log_odds(&table(0, 100, 5, 100), 0.5).unwrap();
        let oracle = ((0.5 * 100.5) / (100.5 * 5.5f64)).ln();
        assert_abs_diff_eq!(s, oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(s, -2.3978952727983707, epsilon = 1e-12);

        assert!(matches!(
            bias_log_odds(&table(0, 100, 5, 100), 0.0),
            Err(BiasError::DegenerateCell(Cell::FAc))
        ));
    }

    #[test]
    fn standard_error_worked_examples() {
        let full = standard_error(&table(30, 1000, 10, 2000), SeMode::Full, 0.0).unwrap();
        let full_oracle = (1.0 / 30.0 + 1.0 / 10.0 + 1.0 / 1000.0 + 1.0 / 2000.0f64).sqrt();
        assert_abs_diff_eq!(full, full_oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(full, 0.3671965867669978, epsilon = 1e-12);

        let approx = standard_error(&table(30, 1000, 10, 2000), SeMode::Approx, 0.0).unwrap();
        assert_abs_diff_eq!(approx, (1.0 / 30.0 + 1.0f64 / 10.0).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(approx, 0.3651483716701107, epsilon = 1e-12);

        // All cells equal to N: full SE = 2/sqrt(N).
        for n in [4u64, 25, 100, 4096] {
            let se = standard_error(&table(n, n, n, n), SeMode::Full, 0.0).unwrap();
            assert_abs_diff_eq!(se, 2.0 / (n as f64).sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn confidence_interval_worked_examples() {
        let (lo, hi) = confidence_interval(1.791759469228055, 0.3671965867669978, 0.95).unwrap();
        assert_abs_diff_eq!(lo, 1.0720673839187023, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, 2.5114515545374076, epsilon = 1e-9);

        let (lo0, hi0) = confidence_interval(0.7, 0.0, 0.95).unwrap();
        assert_eq!((lo0, hi0), (0.7, 0.7));

        let (l, h) = confidence_interval(0.0, 1.0, 0.95).unwrap();
        assert_abs_diff_eq!(l, -1.959964, epsilon = 1e-6);
        assert_abs_diff_eq!(h, 1.959964, epsilon = 1e-6);

        assert!(matches!(
            confidence_interval(0.0, 1.0, 1.0),
            Err(BiasError::InvalidLevel(_))
        ));
        assert!(matches!(
            confidence_interval(0.0, 1.0, 0.0),
            Err(BiasError::InvalidLevel(_))
        ));
    }

    #[test]
    fn significance_worked_examples() {
        let (_, p) = significance(0.0, 0.5).unwrap();
        assert_eq!(p, 1.0);

        let (_, p05) = significance(1.959964, 1.0).unwrap();
        assert_abs_diff_eq!(p05, 0.05, epsilon = 1e-6);

        let (z, p) = significance(1.791759469228055, 0.3671965867669978).unwrap();
        assert_abs_diff_eq!(z, 4.879564608711911, epsilon = 1e-9);
        assert_abs_diff_eq!(p, 1.063202904584843e-6, epsilon = 1e-12);

        assert!(matches!(
            significance(1.0, 0.0),
            Err(BiasError::InvalidStandardError(_))
        ));
    }

    #[test]
    fn approximation_gap_matches_exact_difference() {
        let t = table(30, 1000, 10, 2000);
        let d = check_approximation(&t).unwrap();
        assert_abs_diff_eq!(d.ratio_a, 0.03, epsilon = 1e-15);
        assert_abs_diff_eq!(d.ratio_b, 0.005, epsilon = 1e-15);
        let measured = bias_log_odds(&t, 0.0).unwrap() - bias_exact(&t).unwrap();
        assert_abs_diff_eq!(d.gap, measured, epsilon = 1e-12);
        assert_abs_diff_eq!(d.gap, 0.024571260730505307, epsilon = 1e-12);
    }

    #[test]
    fn approximation_gap_is_zero_for_equal_ratios() {
        // ratio_a == ratio_b makes the gap vanish regardless of magnitude.
        let d = check_approximation(&table(50, 5000, 2, 200)).unwrap();
        assert_abs_diff_eq!(d.gap, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn approximation_gap_bound_for_small_ratios() {
        let bound = 1.01f64.ln();
        let d = check_approximation(&table(10, 1000, 5, 2000)).unwrap();
        assert!(d.ratio_a <= 0.01 && d.ratio_b <= 0.01);
        assert!(d.gap.abs() <= bound + 1e-12);
    }

    #[test]
    fn interpret_log_ratio_reading() {
        let i = interpret(1.3158);
        assert_abs_diff_eq!(i.ratio, 3.727731978277642, epsilon = 1e-12);
        let j = interpret(1.3159);
        assert_abs_diff_eq!(j.ratio, 3.7281047701147507, epsilon = 1e-12);
        assert_abs_diff_eq!(j.percent_more_likely, 272.8104770114751, epsilon = 1e-9);
    }

    #[test]
    fn interpret_trivial_points() {
        let zero = interpret(0.0);
        assert_eq!(zero.ratio, 1.0);
        assert_eq!(zero.percent_more_likely, 0.0);

        let half = interpret(-(2.0f64.ln()));
        assert_abs_diff_eq!(half.ratio, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(half.percent_more_likely, -50.0, epsilon = 1e-12);
    }

    #[test]
    fn estimate_assembles_consistent_fields() {
        let t = table(30, 1000, 10, 2000);
        let est = estimate(&t, &EstimateOptions::default()).unwrap();
        assert_eq!(est.context_label, "c");
        assert_abs_diff_eq!(est.bias, 1.791759469228055, epsilon = 1e-12);
        assert!(est.ci_low <= est.bias && est.bias <= est.ci_high);
        assert_abs_diff_eq!(est.z, est.bias / est.se, epsilon = 1e-12);
        assert_eq!(est.q_value, None);

        let exact = estimate(
            &t,
            &EstimateOptions {
                method: BiasMethod::ExactMl,
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(exact.bias, 1.7671882084975497, epsilon = 1e-12);
    }

    #[test]
    fn estimate_smoothing_handles_zero_cells() {
        let t = table(0, 100, 5, 100);
        assert!(estimate(&t, &EstimateOptions::default()).is_err());
        let est = estimate(
            &t,
            &EstimateOptions {
                smoothing: 0.5,
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(est.bias, -2.3978952727983707, epsilon = 1e-12);
        assert_eq!(est.smoothing, 0.5);
    }

    #[test]
    fn antisymmetry_z_negates_p_invariant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let t = table(
                rng.random_range(1..500),
                rng.random_range(1..5000),
                rng.random_range(1..500),
                rng.random_range(1..5000),
            );
            let s = t.swapped();
            let e1 = estimate(&t, &EstimateOptions::default()).unwrap();
            let e2 = estimate(&s, &EstimateOptions::default()).unwrap();
            assert_abs_diff_eq!(e1.bias, -e2.bias, epsilon = 1e-12);
            assert_abs_diff_eq!(e1.z, -e2.z, epsilon = 1e-12);
            assert_abs_diff_eq!(e1.p_value, e2.p_value, epsilon = 1e-12);
            // CI endpoints swap and negate.
            assert_abs_diff_eq!(e1.ci_low, -e2.ci_high, epsilon = 1e-12);
            assert_abs_diff_eq!(e1.ci_high, -e2.ci_low, epsilon = 1e-12);
        }
    }

    #[test]
    fn log_odds_scale_invariance_and_se_shrinkage() {
        let t = table(30, 1000, 10, 2000);
        let b = bias_log_odds(&t, 0.0).unwrap();
        let se = standard_error(&t, SeMode::Full, 0.0).unwrap();
        for m in [2u64, 10, 1000] {
            let scaled = table(30 * m, 1000 * m, 10 * m, 2000 * m);
            let bs = bias_log_odds(&scaled, 0.0).unwrap();
            assert_abs_diff_eq!(bs, b, epsilon = 1e-12);
            let ses = standard_error(&scaled, SeMode::Full, 0.0).unwrap();
            assert!(ses < se);
        }
    }

    #[test]
    fn approximation_converges_with_growing_margins() {
        // Hold f_AC, f_BC fixed, grow the non-context cells at fixed ratio.
        let mut prev_gap = f64::INFINITY;
        for scale in [1u64, 10, 100, 1000] {
            let t = table(20, 400 * scale, 10, 500 * scale);
            let gap = (bias_log_odds(&t, 0.0).unwrap() - bias_exact(&t).unwrap()).abs();
            let d = check_approximation(&t).unwrap();
            assert_abs_diff_eq!(gap, d.gap.abs(), epsilon = 1e-12);
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-4);
    }

    #[test]
    fn ci_and_significance_agree_on_the_null() {
        // p < 0.05 exactly when 0 lies outside the 95% CI.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let t = table(
                rng.random_range(1..200),
                rng.random_range(1..3000),
                rng.random_range(1..200),
                rng.random_range(1..3000),
            );
            let e = estimate(&t, &EstimateOptions::default()).unwrap();
            let rejected = e.p_value < 0.05;
            let zero_outside = 0.0 < e.ci_low || 0.0 > e.ci_high;
            assert_eq!(rejected, zero_outside, "table {:?}", t.cells());
        }
    }
}
