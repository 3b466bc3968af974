//! Exact analytics on small finite MDPs.
//!
//! Everything here is closed-form linear algebra: values and advantages from
//! `(I - gamma P_pi) V = r_pi`, discounted state occupancies from the
//! transposed solve, the classic and generalized surrogate objectives, and
//! machine checks of the performance-difference identity and the two
//! monotonic-improvement bounds.
//!
//! Discounted state distributions are *unnormalized* by default
//! (`sum_s d(s) = 1/(1-gamma)`); operations that depend on the convention
//! take a `normalized` flag.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{invalid, CoreError, Result};
use crate::linalg;

/// Tolerance for input stochasticity checks.
pub const INPUT_TOL: f64 = 1e-12;
/// Tolerance for exact algebra (Bellman residuals, advantage centering).
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance for identity and bound checks (accumulated solve error).
pub const BOUND_TOL: f64 = 1e-9;

/// Expectation convention for the generalized surrogate, fixed by a
/// one-time calibration sweep: with *unnormalized* discounted sums the
/// improvement bound holds on every randomized instance (and the
/// performance-difference identity is exact), while the (1-gamma)-scaled
/// variant admits violations. Both conventions remain available behind the
/// `normalized` flags; verification paths use this one.
pub const CALIBRATED_G_NORMALIZED: bool = false;

/// A finite MDP: transition tensor `P[s][a][s']`, reward table `r[s][a]`,
/// initial distribution `d0` and discount `gamma` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "MdpRepr", into = "MdpRepr")
)]
pub struct Mdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    initial_dist: Vec<f64>,
    discount: f64,
}

/// Wire representation of [`Mdp`]: nested arrays under the documented
/// `{n_states, n_actions, P, r, d0, gamma}` JSON schema.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MdpRepr {
    pub n_states: usize,
    pub n_actions: usize,
    #[cfg_attr(feature = "serde", serde(rename = "P"))]
    pub transition: Vec<Vec<Vec<f64>>>,
    #[cfg_attr(feature = "serde", serde(rename = "r"))]
    pub reward: Vec<Vec<f64>>,
    #[cfg_attr(feature = "serde", serde(rename = "d0"))]
    pub initial_dist: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(rename = "gamma"))]
    pub discount: f64,
}

impl TryFrom<MdpRepr> for Mdp {
    type Error = CoreError;

    fn try_from(repr: MdpRepr) -> Result<Self> {
        let (s, a) = (repr.n_states, repr.n_actions);
        if repr.transition.len() != s || repr.reward.len() != s {
            return Err(invalid("Mdp: P/r outer dimension != n_states"));
        }
        let mut transition = Vec::with_capacity(s * a * s);
        let mut reward = Vec::with_capacity(s * a);
        for (rows, rrow) in repr.transition.iter().zip(&repr.reward) {
            if rows.len() != a || rrow.len() != a {
                return Err(invalid("Mdp: P/r middle dimension != n_actions"));
            }
            for row in rows {
                if row.len() != s {
                    return Err(invalid("Mdp: P inner dimension != n_states"));
                }
                transition.extend_from_slice(row);
            }
            reward.extend_from_slice(rrow);
        }
        Mdp::new(s, a, transition, reward, repr.initial_dist, repr.discount)
    }
}

impl From<Mdp> for MdpRepr {
    fn from(mdp: Mdp) -> Self {
        let (s, a) = (mdp.n_states, mdp.n_actions);
        let transition = (0..s)
            .map(|si| (0..a).map(|ai| mdp.p_row(si, ai).to_vec()).collect())
            .collect();
        let reward = (0..s)
            .map(|si| (0..a).map(|ai| mdp.reward_at(si, ai)).collect())
            .collect();
        MdpRepr {
            n_states: s,
            n_actions: a,
            transition,
            reward,
            initial_dist: mdp.initial_dist,
            discount: mdp.discount,
        }
    }
}

fn check_distribution(row: &[f64], what: &str, tol: f64) -> Result<()> {
    let mut sum = 0.0;
    for &p in row {
        if !(p >= 0.0) {
            return Err(invalid(format!("{what}: negative or NaN probability {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > tol {
        return Err(invalid(format!("{what}: probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

impl Mdp {
    /// Validates stochasticity of every `P[s][a][.]` row and of `d0`
    /// (each sums to 1 within 1e-12, elementwise nonnegative) and
    /// `0 <= gamma < 1`. Tensors are flat row-major.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        initial_dist: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(invalid("Mdp: n_states and n_actions must be positive"));
        }
        if transition.len() != n_states * n_actions * n_states {
            return Err(invalid("Mdp: transition tensor has wrong length"));
        }
        if reward.len() != n_states * n_actions {
            return Err(invalid("Mdp: reward table has wrong length"));
        }
        if initial_dist.len() != n_states {
            return Err(invalid("Mdp: initial distribution has wrong length"));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(invalid(format!("Mdp: gamma {discount} not in [0, 1)")));
        }
        if reward.iter().any(|r| !r.is_finite()) {
            return Err(invalid("Mdp: non-finite reward"));
        }
        for s in 0..n_states {
            for a in 0..n_actions {
                let base = (s * n_actions + a) * n_states;
                check_distribution(
                    &transition[base..base + n_states],
                    &format!("Mdp: P[{s}][{a}]"),
                    INPUT_TOL,
                )?;
            }
        }
        check_distribution(&initial_dist, "Mdp: d0", INPUT_TOL)?;
        Ok(Mdp {
            n_states,
            n_actions,
            transition,
            reward,
            initial_dist,
            discount,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn initial_dist(&self) -> &[f64] {
        &self.initial_dist
    }

    /// `P[s][a][.]` as a slice over next states.
    pub fn p_row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.transition[base..base + self.n_states]
    }

    pub fn reward_at(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    fn check_policy(&self, pi: &TabularPolicy) -> Result<()> {
        if pi.n_states != self.n_states || pi.n_actions != self.n_actions {
            return Err(invalid("policy shape does not match MDP"));
        }
        Ok(())
    }

    /// State transition matrix `P_pi[s][s']` and state reward `r_pi[s]`
    /// under a fixed policy.
    fn induced(&self, pi: &TabularPolicy) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_states;
        let mut p_pi = vec![0.0; n * n];
        let mut r_pi = vec![0.0; n];
        for s in 0..n {
            for a in 0..self.n_actions {
                let w = pi.prob(s, a);
                if w == 0.0 {
                    continue;
                }
                r_pi[s] += w * self.reward_at(s, a);
                let row = self.p_row(s, a);
                for (s2, &p) in row.iter().enumerate() {
                    p_pi[s * n + s2] += w * p;
                }
            }
        }
        (p_pi, r_pi)
    }
}

/// Exact per-state action distributions `pi[s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl TabularPolicy {
    /// Each row must sum to 1 within 1e-12 and be elementwise nonnegative.
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n_states * n_actions {
            return Err(invalid("TabularPolicy: probs has wrong length"));
        }
        for s in 0..n_states {
            check_distribution(
                &probs[s * n_actions..(s + 1) * n_actions],
                &format!("TabularPolicy: row {s}"),
                INPUT_TOL,
            )?;
        }
        Ok(TabularPolicy {
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        TabularPolicy {
            n_states,
            n_actions,
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    /// Deterministic policy picking `argmax_a scores[s][a]`.
    pub fn greedy(n_states: usize, n_actions: usize, scores: &[f64]) -> Result<Self> {
        if scores.len() != n_states * n_actions {
            return Err(invalid("greedy: scores has wrong length"));
        }
        let mut probs = vec![0.0; n_states * n_actions];
        for s in 0..n_states {
            let row = &scores[s * n_actions..(s + 1) * n_actions];
            let mut best = 0;
            for (a, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = a;
                }
            }
            probs[s * n_actions + best] = 1.0;
        }
        Ok(TabularPolicy {
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }
}

/// A generalized state-action function `A(s,a) = r(s,a) + gamma E[f(s')] - f(s)`
/// for an arbitrary `f`. Equals the advantage of `pi` when `f = V_pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateActionFn {
    /// `A[s][a]`, flat row-major.
    pub values: Vec<f64>,
    /// The `f` this table was built from, when known.
    pub generator_f: Option<Vec<f64>>,
}

impl StateActionFn {
    pub fn value(&self, s: usize, a: usize, n_actions: usize) -> f64 {
        self.values[s * n_actions + a]
    }
}

/// Outcome of a bound check. For Theorem-1-style checks `lhs` is `J(pi_new)`
/// and `surrogate` is `L_pi(pi_new)`; for Theorem-2-style checks `lhs` is
/// `J(pi_new) - J(pi_old)` and `surrogate` is `G_pi(pi_new)`. Either way the
/// claim is `lhs >= surrogate - penalty`, and `holds` reports it with
/// [`BOUND_TOL`] slack.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub lhs: f64,
    pub surrogate: f64,
    pub penalty: f64,
    /// The deviation quantity: max-TV `alpha` (Theorem 1) or the maximum
    /// advantage-weighted ratio deviation `delta` (Theorem 2).
    pub delta_term: f64,
    /// `max_{s,a} |A_pi|` (Theorem 1) or `max_s |sum_a pi A|` (Theorem 2).
    pub epsilon_term: f64,
    pub holds: bool,
}

impl BoundReport {
    fn from_parts(lhs: f64, surrogate: f64, penalty: f64, delta: f64, eps: f64) -> Self {
        BoundReport {
            lhs,
            surrogate,
            penalty,
            delta_term: delta,
            epsilon_term: eps,
            holds: lhs >= surrogate - penalty - BOUND_TOL,
        }
    }

    /// Slack of the inequality, nonnegative when it holds exactly.
    pub fn slack(&self) -> f64 {
        self.lhs - (self.surrogate - self.penalty)
    }
}

/// State values of `pi` from the direct linear solve `(I - gamma P_pi) V = r_pi`.
///
/// The system is nonsingular for every `gamma < 1`, so the only failure mode
/// is a shape mismatch.
pub fn solve_value(mdp: &Mdp, pi: &TabularPolicy) -> Result<Vec<f64>> {
    mdp.check_policy(pi)?;
    let n = mdp.n_states;
    let (p_pi, r_pi) = mdp.induced(pi);
    let mut system = vec![0.0; n * n];
    for s in 0..n {
        for s2 in 0..n {
            let eye = if s == s2 { 1.0 } else { 0.0 };
            system[s * n + s2] = eye - mdp.discount * p_pi[s * n + s2];
        }
    }
    linalg::solve(&system, &r_pi, n)
}

/// Action values `Q[s][a] = r + gamma P V` and advantages `A = Q - V`.
pub fn q_and_advantage(mdp: &Mdp, pi: &TabularPolicy) -> Result<(Vec<f64>, Vec<f64>)> {
    let v = solve_value(mdp, pi)?;
    let mut q = vec![0.0; mdp.n_states * mdp.n_actions];
    let mut adv = vec![0.0; mdp.n_states * mdp.n_actions];
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let mut expected = 0.0;
            for (s2, &p) in mdp.p_row(s, a).iter().enumerate() {
                expected += p * v[s2];
            }
            let qsa = mdp.reward_at(s, a) + mdp.discount * expected;
            q[s * mdp.n_actions + a] = qsa;
            adv[s * mdp.n_actions + a] = qsa - v[s];
        }
    }
    Ok((q, adv))
}

/// Discounted state distribution `d(s) = sum_t gamma^t P(s_t = s)`, from the
/// transposed solve `(I - gamma P_pi)^T d = d0`. Unnormalized it sums to
/// `1/(1-gamma)`; with `normalized` it is scaled by `(1-gamma)`.
pub fn discounted_state_dist(mdp: &Mdp, pi: &TabularPolicy, normalized: bool) -> Result<Vec<f64>> {
    mdp.check_policy(pi)?;
    let n = mdp.n_states;
    let (p_pi, _) = mdp.induced(pi);
    let mut system = vec![0.0; n * n];
    for s in 0..n {
        for s2 in 0..n {
            let eye = if s == s2 { 1.0 } else { 0.0 };
            system[s * n + s2] = eye - mdp.discount * p_pi[s * n + s2];
        }
    }
    let mut d = linalg::solve_transposed(&system, &mdp.initial_dist, n)?;
    if normalized {
        for x in &mut d {
            *x *= 1.0 - mdp.discount;
        }
    }
    Ok(d)
}

/// Policy performance `J(pi) = sum_s d0[s] V[s]`.
pub fn performance(mdp: &Mdp, pi: &TabularPolicy) -> Result<f64> {
    let v = solve_value(mdp, pi)?;
    Ok(mdp
        .initial_dist
        .iter()
        .zip(&v)
        .map(|(d0, vs)| d0 * vs)
        .sum())
}

/// Build the generalized state-action function
/// `A(s,a) = r(s,a) + gamma sum_s' P[s][a][s'] f(s') - f(s)`.
pub fn state_action_fn_from_f(mdp: &Mdp, f: &[f64]) -> Result<StateActionFn> {
    if f.len() != mdp.n_states {
        return Err(invalid("state_action_fn_from_f: f has wrong length"));
    }
    let mut values = vec![0.0; mdp.n_states * mdp.n_actions];
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let mut expected = 0.0;
            for (s2, &p) in mdp.p_row(s, a).iter().enumerate() {
                expected += p * f[s2];
            }
            values[s * mdp.n_actions + a] = mdp.reward_at(s, a) + mdp.discount * expected - f[s];
        }
    }
    Ok(StateActionFn {
        values,
        generator_f: Some(f.to_vec()),
    })
}

fn check_saf(mdp: &Mdp, saf: &StateActionFn) -> Result<()> {
    if saf.values.len() != mdp.n_states * mdp.n_actions {
        return Err(invalid("state-action function shape does not match MDP"));
    }
    Ok(())
}

/// Expectation `sum_s d_mu(s) sum_a mu(a|s) A(s,a)` with unnormalized `d_mu`.
fn occupancy_expectation(mdp: &Mdp, mu: &TabularPolicy, saf: &StateActionFn) -> Result<f64> {
    let d = discounted_state_dist(mdp, mu, false)?;
    let mut total = 0.0;
    for s in 0..mdp.n_states {
        let mut inner = 0.0;
        for a in 0..mdp.n_actions {
            inner += mu.prob(s, a) * saf.value(s, a, mdp.n_actions);
        }
        total += d[s] * inner;
    }
    Ok(total)
}

/// Both sides of the performance-difference identity
/// `J(pi_new) - J(pi_old) = E_{d_new, pi_new}[A] - E_{d_old, pi_old}[A]`,
/// with unnormalized discounted sums. Returns `(lhs, rhs)`.
pub fn performance_difference(
    mdp: &Mdp,
    pi_new: &TabularPolicy,
    pi_old: &TabularPolicy,
    saf: &StateActionFn,
) -> Result<(f64, f64)> {
    mdp.check_policy(pi_new)?;
    mdp.check_policy(pi_old)?;
    check_saf(mdp, saf)?;
    let lhs = performance(mdp, pi_new)? - performance(mdp, pi_old)?;
    let rhs = occupancy_expectation(mdp, pi_new, saf)? - occupancy_expectation(mdp, pi_old, saf)?;
    Ok((lhs, rhs))
}

/// Classic surrogate `L_pi(pi_new) = J(pi_old) + sum_s d_old(s) sum_a
/// pi_new(a|s) A_old(s,a)`, with unnormalized `d_old`.
pub fn surrogate_l(mdp: &Mdp, pi_new: &TabularPolicy, pi_old: &TabularPolicy) -> Result<f64> {
    mdp.check_policy(pi_new)?;
    let j_old = performance(mdp, pi_old)?;
    let (_, adv) = q_and_advantage(mdp, pi_old)?;
    let d = discounted_state_dist(mdp, pi_old, false)?;
    let mut total = j_old;
    for s in 0..mdp.n_states {
        let mut inner = 0.0;
        for a in 0..mdp.n_actions {
            inner += pi_new.prob(s, a) * adv[s * mdp.n_actions + a];
        }
        total += d[s] * inner;
    }
    Ok(total)
}

/// Per-(s,a) ratio deviation `pi_new/pi_old - 1` times `A(s,a)`, the quantity
/// both the generalized surrogate and its bound are built from.
///
/// Entries with `pi_old = 0` are tolerated only while they cannot matter
/// (`pi_new = 0`, or `A = 0`); otherwise this is a division by zero naming
/// the offending `(s, a)`.
fn weighted_deviation(
    pi_new: &TabularPolicy,
    pi_old: &TabularPolicy,
    saf: &StateActionFn,
    s: usize,
    a: usize,
) -> Result<f64> {
    let n_actions = pi_old.n_actions;
    let p_old = pi_old.prob(s, a);
    let p_new = pi_new.prob(s, a);
    let adv = saf.value(s, a, n_actions);
    if p_old == 0.0 {
        if p_new == 0.0 || adv == 0.0 {
            return Ok(0.0);
        }
        return Err(CoreError::DivisionByZero { state: s, action: a });
    }
    Ok((p_new / p_old - 1.0) * adv)
}

/// Generalized surrogate
/// `G_pi(pi_new) = sum_s d_old(s) sum_a pi_old(a|s) (pi_new/pi_old - 1) A(s,a)`,
/// with `d_old` normalized per the flag.
pub fn surrogate_g(
    mdp: &Mdp,
    pi_new: &TabularPolicy,
    pi_old: &TabularPolicy,
    saf: &StateActionFn,
    normalized: bool,
) -> Result<f64> {
    mdp.check_policy(pi_new)?;
    mdp.check_policy(pi_old)?;
    check_saf(mdp, saf)?;
    let d = discounted_state_dist(mdp, pi_old, normalized)?;
    let mut total = 0.0;
    for s in 0..mdp.n_states {
        let mut inner = 0.0;
        for a in 0..mdp.n_actions {
            inner += pi_old.prob(s, a) * weighted_deviation(pi_new, pi_old, saf, s, a)?;
        }
        total += d[s] * inner;
    }
    Ok(total)
}

/// Maximum over states of the total variation `1/2 sum_a |pi_a - pi_b|`.
pub fn max_tv(pi_a: &TabularPolicy, pi_b: &TabularPolicy) -> Result<f64> {
    if pi_a.n_states != pi_b.n_states || pi_a.n_actions != pi_b.n_actions {
        return Err(invalid("max_tv: policy shapes differ"));
    }
    let mut worst: f64 = 0.0;
    for s in 0..pi_a.n_states {
        let tv: f64 = pi_a
            .row(s)
            .iter()
            .zip(pi_b.row(s))
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            / 2.0;
        worst = worst.max(tv);
    }
    Ok(worst)
}

/// Maximum over states of `KL(pi_a(.|s) || pi_b(.|s))`. Requires
/// `support(pi_a) subset of support(pi_b)` rowwise.
pub fn max_kl(pi_a: &TabularPolicy, pi_b: &TabularPolicy) -> Result<f64> {
    if pi_a.n_states != pi_b.n_states || pi_a.n_actions != pi_b.n_actions {
        return Err(invalid("max_kl: policy shapes differ"));
    }
    let mut worst: f64 = 0.0;
    for s in 0..pi_a.n_states {
        let mut kl = 0.0;
        for a in 0..pi_a.n_actions {
            let p = pi_a.prob(s, a);
            if p == 0.0 {
                continue;
            }
            let q = pi_b.prob(s, a);
            if q == 0.0 {
                return Err(CoreError::Domain(format!(
                    "max_kl: support violation at state {s}, action {a}"
                )));
            }
            kl += p * (p / q).ln();
        }
        worst = worst.max(kl);
    }
    Ok(worst)
}

/// Check the TV-based improvement bound
/// `J(pi_new) >= L_pi(pi_new) - 4 eps gamma / (1-gamma)^2 * alpha^2`
/// with `alpha = max_s TV(pi_old, pi_new)` and `eps = max_{s,a} |A_old|`.
pub fn check_theorem1(mdp: &Mdp, pi_new: &TabularPolicy, pi_old: &TabularPolicy) -> Result<BoundReport> {
    let j_new = performance(mdp, pi_new)?;
    let l = surrogate_l(mdp, pi_new, pi_old)?;
    let alpha = max_tv(pi_old, pi_new)?;
    let (_, adv) = q_and_advantage(mdp, pi_old)?;
    let eps = adv.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let gamma = mdp.discount;
    let penalty = 4.0 * eps * gamma / ((1.0 - gamma) * (1.0 - gamma)) * alpha * alpha;
    Ok(BoundReport::from_parts(j_new, l, penalty, alpha, eps))
}

/// Check the trust-region-free improvement bound
/// `J(pi_new) - J(pi_old) >= G_pi(pi_new) - 2 gamma / (1-gamma) * (delta + eps)`
/// with `delta = max_{s,a} |(pi_new/pi_old - 1) A(s,a)|` and
/// `eps = max_s |sum_a pi_old(a|s) A(s,a)|`.
pub fn check_theorem2(
    mdp: &Mdp,
    pi_new: &TabularPolicy,
    pi_old: &TabularPolicy,
    saf: &StateActionFn,
    normalized: bool,
) -> Result<BoundReport> {
    let lhs = performance(mdp, pi_new)? - performance(mdp, pi_old)?;
    let g = surrogate_g(mdp, pi_new, pi_old, saf, normalized)?;
    let mut delta: f64 = 0.0;
    let mut eps: f64 = 0.0;
    for s in 0..mdp.n_states {
        let mut avg = 0.0;
        for a in 0..mdp.n_actions {
            delta = delta.max(weighted_deviation(pi_new, pi_old, saf, s, a)?.abs());
            avg += pi_old.prob(s, a) * saf.value(s, a, mdp.n_actions);
        }
        eps = eps.max(avg.abs());
    }
    let gamma = mdp.discount;
    let penalty = 2.0 * gamma / (1.0 - gamma) * (delta + eps);
    Ok(BoundReport::from_parts(lhs, g, penalty, delta, eps))
}

pub mod random {
    //! Randomized instances for the verification suites: Dirichlet(1) rows
    //! for transitions and policies, rewards uniform on [-1, 1].

    use alloc::vec::Vec;
    #[cfg(not(feature = "std"))]
    use num_traits::Float;
    use rand::Rng;

    use super::{Mdp, TabularPolicy};

    /// One Dirichlet(1) row: normalized unit exponentials.
    fn dirichlet_row<R: Rng>(rng: &mut R, n: usize, out: &mut Vec<f64>) {
        let start = out.len();
        let mut sum = 0.0;
        for _ in 0..n {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let e = -u.ln();
            sum += e;
            out.push(e);
        }
        for x in &mut out[start..] {
            *x /= sum;
        }
    }

    pub fn mdp<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize, gamma: f64) -> Mdp {
        let mut transition = Vec::with_capacity(n_states * n_actions * n_states);
        for _ in 0..n_states * n_actions {
            dirichlet_row(rng, n_states, &mut transition);
        }
        let reward = (0..n_states * n_actions)
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect();
        let mut initial_dist = Vec::with_capacity(n_states);
        dirichlet_row(rng, n_states, &mut initial_dist);
        Mdp::new(n_states, n_actions, transition, reward, initial_dist, gamma)
            .expect("random generator produces valid MDPs")
    }

    pub fn policy<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> TabularPolicy {
        let mut probs = Vec::with_capacity(n_states * n_actions);
        for _ in 0..n_states {
            dirichlet_row(rng, n_actions, &mut probs);
        }
        TabularPolicy::new(n_states, n_actions, probs)
            .expect("random generator produces valid policies")
    }

    /// A random `f: S -> R`, uniform on [-scale, scale].
    pub fn state_fn<R: Rng>(rng: &mut R, n_states: usize, scale: f64) -> Vec<f64> {
        (0..n_states).map(|_| rng.gen_range(-scale..=scale)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn single_state_mdp(reward: f64, gamma: f64) -> Mdp {
        Mdp::new(1, 1, vec![1.0], vec![reward], vec![1.0], gamma).unwrap()
    }

    #[test]
    fn geometric_series_value() {
        let mdp = single_state_mdp(1.0, 0.9);
        let pi = TabularPolicy::uniform(1, 1);
        let v = solve_value(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(v[0], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(performance(&mdp, &pi).unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_reward_zero_value() {
        let mut rng = rng_for(0, 42);
        let mut mdp = random::mdp(&mut rng, 4, 3, 0.9);
        mdp.reward.iter_mut().for_each(|r| *r = 0.0);
        let pi = random::policy(&mut rng, 4, 3);
        let v = solve_value(&mdp, &pi).unwrap();
        for x in v {
            assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(performance(&mdp, &pi).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn value_matches_value_iteration_oracle() {
        let mut rng = rng_for(1, 42);
        let mdp = random::mdp(&mut rng, 4, 3, 0.9);
        let pi = random::policy(&mut rng, 4, 3);
        let v = solve_value(&mdp, &pi).unwrap();

        // Independent oracle: value iteration to 1e-12 convergence.
        let mut vi = vec![0.0; 4];
        loop {
            let mut next = vec![0.0; 4];
            for s in 0..4 {
                for a in 0..3 {
                    let mut exp = 0.0;
                    for (s2, &p) in mdp.p_row(s, a).iter().enumerate() {
                        exp += p * vi[s2];
                    }
                    next[s] += pi.prob(s, a) * (mdp.reward_at(s, a) + 0.9 * exp);
                }
            }
            let diff: f64 = next
                .iter()
                .zip(&vi)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            vi = next;
            if diff < 1e-13 {
                break;
            }
        }
        for s in 0..4 {
            assert_abs_diff_eq!(v[s], vi[s], epsilon = 1e-10);
        }
    }

    #[test]
    fn bellman_residual_is_tiny() {
        let mut rng = rng_for(2, 42);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(1..=4);
            let gamma = rng.gen_range(0.0..0.99);
            let mdp = random::mdp(&mut rng, n, m, gamma);
            let pi = random::policy(&mut rng, n, m);
            let v = solve_value(&mdp, &pi).unwrap();
            let (p_pi, r_pi) = mdp.induced(&pi);
            for s in 0..n {
                let mut rhs = r_pi[s];
                for s2 in 0..n {
                    rhs += mdp.discount * p_pi[s * n + s2] * v[s2];
                }
                assert!((v[s] - rhs).abs() <= EXACT_TOL, "Bellman residual too large");
            }
        }
    }

    #[test]
    fn single_action_advantage_is_zero() {
        let mut rng = rng_for(3, 42);
        let mdp = random::mdp(&mut rng, 5, 1, 0.8);
        let pi = TabularPolicy::uniform(5, 1);
        let (_, adv) = q_and_advantage(&mdp, &pi).unwrap();
        for a in adv {
            assert_abs_diff_eq!(a, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn gamma_zero_q_equals_reward() {
        // 1 state, 2 actions, r = [1, 0], gamma = 0, uniform policy.
        let mdp = Mdp::new(1, 2, vec![1.0, 1.0], vec![1.0, 0.0], vec![1.0], 0.0).unwrap();
        let pi = TabularPolicy::uniform(1, 2);
        let (q, adv) = q_and_advantage(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(q[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(adv[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(adv[1], -0.5, epsilon = 1e-12);
        let v = solve_value(&mdp, &pi).unwrap();
        assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn advantage_centers_to_zero() {
        let mut rng = rng_for(4, 42);
        for _ in 0..20 {
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(2..=4);
            let mdp = random::mdp(&mut rng, n, m, 0.95);
            let pi = random::policy(&mut rng, n, m);
            let (_, adv) = q_and_advantage(&mdp, &pi).unwrap();
            for s in 0..n {
                let centered: f64 = (0..m).map(|a| pi.prob(s, a) * adv[s * m + a]).sum();
                assert!(centered.abs() <= EXACT_TOL);
            }
        }
    }

    #[test]
    fn state_dist_single_state() {
        let mdp = single_state_mdp(1.0, 0.9);
        let pi = TabularPolicy::uniform(1, 1);
        let d = discounted_state_dist(&mdp, &pi, false).unwrap();
        assert_abs_diff_eq!(d[0], 10.0, epsilon = 1e-10);
        let dn = discounted_state_dist(&mdp, &pi, true).unwrap();
        assert_abs_diff_eq!(dn[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn state_dist_gamma_zero_is_d0() {
        let mut rng = rng_for(5, 42);
        let mdp = random::mdp(&mut rng, 5, 2, 0.0);
        let pi = random::policy(&mut rng, 5, 2);
        let d = discounted_state_dist(&mdp, &pi, false).unwrap();
        for s in 0..5 {
            assert_abs_diff_eq!(d[s], mdp.initial_dist()[s], epsilon = 1e-12);
        }
    }

    #[test]
    fn state_dist_matches_power_series_oracle() {
        let mut rng = rng_for(6, 42);
        let mdp = random::mdp(&mut rng, 5, 3, 0.9);
        let pi = random::policy(&mut rng, 5, 3);
        let d = discounted_state_dist(&mdp, &pi, false).unwrap();

        // Oracle: truncated power series sum_{t<=500} gamma^t d0^T P_pi^t.
        let (p_pi, _) = mdp.induced(&pi);
        let mut cur = mdp.initial_dist().to_vec();
        let mut acc = vec![0.0; 5];
        let mut scale = 1.0;
        for _ in 0..=500 {
            for s in 0..5 {
                acc[s] += scale * cur[s];
            }
            let mut next = vec![0.0; 5];
            for s in 0..5 {
                for s2 in 0..5 {
                    next[s2] += cur[s] * p_pi[s * 5 + s2];
                }
            }
            cur = next;
            scale *= mdp.discount();
        }
        for s in 0..5 {
            assert_abs_diff_eq!(d[s], acc[s], epsilon = 1e-8);
        }
        let total: f64 = d.iter().sum();
        assert_abs_diff_eq!(total, 10.0, epsilon = 1e-10);
    }

    #[test]
    fn state_action_fn_zero_f_is_reward() {
        let mut rng = rng_for(7, 42);
        let mdp = random::mdp(&mut rng, 4, 2, 0.9);
        let saf = state_action_fn_from_f(&mdp, &[0.0; 4]).unwrap();
        for s in 0..4 {
            for a in 0..2 {
                assert_abs_diff_eq!(saf.value(s, a, 2), mdp.reward_at(s, a), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn state_action_fn_from_value_is_advantage() {
        let mut rng = rng_for(8, 42);
        let mdp = random::mdp(&mut rng, 5, 3, 0.85);
        let pi = random::policy(&mut rng, 5, 3);
        let v = solve_value(&mdp, &pi).unwrap();
        let saf = state_action_fn_from_f(&mdp, &v).unwrap();
        let (_, adv) = q_and_advantage(&mdp, &pi).unwrap();
        for i in 0..15 {
            assert_abs_diff_eq!(saf.values[i], adv[i], epsilon = 1e-10);
        }
    }

    #[test]
    fn state_action_fn_constant_shift() {
        // f -> f + c shifts every A entry by (gamma - 1) c exactly.
        let mut rng = rng_for(9, 42);
        let mdp = random::mdp(&mut rng, 4, 2, 0.9);
        let pi = random::policy(&mut rng, 4, 2);
        let v = solve_value(&mdp, &pi).unwrap();
        let c = 3.25;
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let base = state_action_fn_from_f(&mdp, &v).unwrap();
        let moved = state_action_fn_from_f(&mdp, &shifted).unwrap();
        for i in 0..8 {
            assert_abs_diff_eq!(
                moved.values[i] - base.values[i],
                (mdp.discount() - 1.0) * c,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn identical_policies_have_zero_difference() {
        let mut rng = rng_for(10, 42);
        let mdp = random::mdp(&mut rng, 4, 3, 0.9);
        let pi = random::policy(&mut rng, 4, 3);
        let f = random::state_fn(&mut rng, 4, 2.0);
        let saf = state_action_fn_from_f(&mdp, &f).unwrap();
        let (lhs, rhs) = performance_difference(&mdp, &pi, &pi, &saf).unwrap();
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rhs, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn difference_with_value_f_reduces_to_classic_identity() {
        let mut rng = rng_for(11, 42);
        let mdp = random::mdp(&mut rng, 5, 2, 0.9);
        let pi_old = random::policy(&mut rng, 5, 2);
        let pi_new = random::policy(&mut rng, 5, 2);
        let v = solve_value(&mdp, &pi_old).unwrap();
        let saf = state_action_fn_from_f(&mdp, &v).unwrap();
        let (lhs, rhs) = performance_difference(&mdp, &pi_new, &pi_old, &saf).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = BOUND_TOL);
        // With f = V_old the old-policy term vanishes and the rhs is the
        // classic sum over the new policy's discounted occupancy.
        let d_new = discounted_state_dist(&mdp, &pi_new, false).unwrap();
        let (_, adv) = q_and_advantage(&mdp, &pi_old).unwrap();
        let classic: f64 = (0..5)
            .map(|s| {
                d_new[s]
                    * (0..2)
                        .map(|a| pi_new.prob(s, a) * adv[s * 2 + a])
                        .sum::<f64>()
            })
            .sum();
        assert_abs_diff_eq!(rhs, classic, epsilon = BOUND_TOL);
    }

    #[test]
    fn identity_holds_on_random_instances() {
        let mut rng = rng_for(12, 42);
        for _ in 0..100 {
            let n = rng.gen_range(2..=5);
            let m = rng.gen_range(2..=3);
            let gamma = rng.gen_range(0.3..0.95);
            let mdp = random::mdp(&mut rng, n, m, gamma);
            let pi_old = random::policy(&mut rng, n, m);
            let pi_new = random::policy(&mut rng, n, m);
            let f = random::state_fn(&mut rng, n, 3.0);
            let saf = state_action_fn_from_f(&mdp, &f).unwrap();
            let (lhs, rhs) = performance_difference(&mdp, &pi_new, &pi_old, &saf).unwrap();
            assert!((lhs - rhs).abs() <= BOUND_TOL, "identity violated: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn surrogate_l_at_same_policy_is_performance() {
        let mut rng = rng_for(13, 42);
        let mdp = random::mdp(&mut rng, 4, 3, 0.9);
        let pi = random::policy(&mut rng, 4, 3);
        let l = surrogate_l(&mdp, &pi, &pi).unwrap();
        assert_abs_diff_eq!(l, performance(&mdp, &pi).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn surrogate_l_matches_brute_force() {
        let mut rng = rng_for(14, 42);
        let mdp = random::mdp(&mut rng, 5, 3, 0.9);
        let pi_old = random::policy(&mut rng, 5, 3);
        let pi_new = random::policy(&mut rng, 5, 3);
        let l = surrogate_l(&mdp, &pi_new, &pi_old).unwrap();

        let d = discounted_state_dist(&mdp, &pi_old, false).unwrap();
        let (_, adv) = q_and_advantage(&mdp, &pi_old).unwrap();
        let mut brute = performance(&mdp, &pi_old).unwrap();
        for s in 0..5 {
            for a in 0..3 {
                brute += d[s] * pi_new.prob(s, a) * adv[s * 3 + a];
            }
        }
        assert_abs_diff_eq!(l, brute, epsilon = 1e-10);
    }

    #[test]
    fn surrogate_gradient_matches_performance_gradient_at_origin() {
        // First-order check through a tabular softmax parameterization:
        // finite differences of L and J in theta agree at pi_new = pi_old.
        let mut rng = rng_for(15, 42);
        let n = 4;
        let m = 3;
        let mdp = random::mdp(&mut rng, n, m, 0.9);
        let theta0: Vec<f64> = (0..n * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let softmax = |theta: &[f64]| -> TabularPolicy {
            let mut probs = vec![0.0; n * m];
            for s in 0..n {
                let row = &theta[s * m..(s + 1) * m];
                let mx = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut z = 0.0;
                for a in 0..m {
                    let e = (row[a] - mx).exp();
                    probs[s * m + a] = e;
                    z += e;
                }
                for a in 0..m {
                    probs[s * m + a] /= z;
                }
            }
            TabularPolicy::new(n, m, probs).unwrap()
        };
        let pi_old = softmax(&theta0);
        let h = 1e-6;
        for k in 0..n * m {
            let mut up = theta0.clone();
            let mut dn = theta0.clone();
            up[k] += h;
            dn[k] -= h;
            let dl = (surrogate_l(&mdp, &softmax(&up), &pi_old).unwrap()
                - surrogate_l(&mdp, &softmax(&dn), &pi_old).unwrap())
                / (2.0 * h);
            let dj = (performance(&mdp, &softmax(&up)).unwrap()
                - performance(&mdp, &softmax(&dn)).unwrap())
                / (2.0 * h);
            let denom = dl.abs().max(dj.abs()).max(1e-6);
            assert!(
                (dl - dj).abs() / denom <= 1e-5,
                "dL/dtheta[{k}] = {dl} vs dJ/dtheta[{k}] = {dj}"
            );
        }
    }

    #[test]
    fn surrogate_g_is_zero_at_same_policy() {
        let mut rng = rng_for(16, 42);
        let mdp = random::mdp(&mut rng, 4, 3, 0.9);
        let pi = random::policy(&mut rng, 4, 3);
        let f = random::state_fn(&mut rng, 4, 2.0);
        let saf = state_action_fn_from_f(&mdp, &f).unwrap();
        for normalized in [false, true] {
            let g = surrogate_g(&mdp, &pi, &pi, &saf, normalized).unwrap();
            assert_abs_diff_eq!(g, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn surrogate_g_with_value_f_matches_l() {
        let mut rng = rng_for(17, 42);
        let mdp = random::mdp(&mut rng, 5, 3, 0.9);
        let pi_old = random::policy(&mut rng, 5, 3);
        let pi_new = random::policy(&mut rng, 5, 3);
        let v = solve_value(&mdp, &pi_old).unwrap();
        let saf = state_action_fn_from_f(&mdp, &v).unwrap();
        let l = surrogate_l(&mdp, &pi_new, &pi_old).unwrap();
        let j = performance(&mdp, &pi_old).unwrap();
        let g_un = surrogate_g(&mdp, &pi_new, &pi_old, &saf, false).unwrap();
        assert_abs_diff_eq!(g_un, l - j, epsilon = 1e-9);
        let g_norm = surrogate_g(&mdp, &pi_new, &pi_old, &saf, true).unwrap();
        assert_abs_diff_eq!(g_norm, (1.0 - mdp.discount()) * (l - j), epsilon = 1e-9);
    }

    #[test]
    fn surrogate_g_matches_brute_force_double_sum() {
        let mut rng = rng_for(18, 42);
        let mdp = random::mdp(&mut rng, 4, 3, 0.8);
        let pi_old = random::policy(&mut rng, 4, 3);
        let pi_new = random::policy(&mut rng, 4, 3);
        let f = random::state_fn(&mut rng, 4, 1.5);
        let saf = state_action_fn_from_f(&mdp, &f).unwrap();
        let d = discounted_state_dist(&mdp, &pi_old, false).unwrap();
        let mut brute = 0.0;
        for s in 0..4 {
            for a in 0..3 {
                brute += d[s]
                    * pi_old.prob(s, a)
                    * (pi_new.prob(s, a) / pi_old.prob(s, a) - 1.0)
                    * saf.value(s, a, 3);
            }
        }
        let g = surrogate_g(&mdp, &pi_new, &pi_old, &saf, false).unwrap();
        assert_abs_diff_eq!(g, brute, epsilon = 1e-10);
    }

    #[test]
    fn surrogate_g_zero_denominator_error_names_the_point() {
        let mdp = Mdp::new(1, 2, vec![1.0, 1.0], vec![1.0, -1.0], vec![1.0], 0.5).unwrap();
        let pi_old = TabularPolicy::new(1, 2, vec![1.0, 0.0]).unwrap();
        let pi_new = TabularPolicy::new(1, 2, vec![0.5, 0.5]).unwrap();
        let saf = state_action_fn_from_f(&mdp, &[0.0]).unwrap();
        let err = surrogate_g(&mdp, &pi_new, &pi_old, &saf, false).unwrap_err();
        assert_eq!(err, CoreError::DivisionByZero { state: 0, action: 1 });
    }

    #[test]
    fn divergences_on_simple_rows() {
        let a = TabularPolicy::new(1, 2, vec![1.0, 0.0]).unwrap();
        let b = TabularPolicy::new(1, 2, vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(max_tv(&a, &b).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(max_tv(&a, &a).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(max_kl(&a, &b).unwrap(), core::f64::consts::LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(max_kl(&a, &a).unwrap(), 0.0, epsilon = 1e-12);
        // Support violation: b puts mass where a has none is fine, the
        // reverse is not.
        assert!(matches!(max_kl(&b, &a), Err(CoreError::Domain(_))));
    }

    #[test]
    fn pinsker_holds_per_state_on_random_policies() {
        let mut rng = rng_for(19, 42);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(2..=4);
            let a = random::policy(&mut rng, n, m);
            let b = random::policy(&mut rng, n, m);
            for s in 0..n {
                let tv: f64 = a
                    .row(s)
                    .iter()
                    .zip(b.row(s))
                    .map(|(x, y)| (x - y).abs())
                    .sum::<f64>()
                    / 2.0;
                let kl: f64 = a
                    .row(s)
                    .iter()
                    .zip(b.row(s))
                    .filter(|(x, _)| **x > 0.0)
                    .map(|(x, y)| x * (x / y).ln())
                    .sum();
                assert!(tv * tv <= 0.5 * kl + 1e-12);
            }
        }
    }

    #[test]
    fn theorem1_trivial_and_greedy() {
        let mut rng = rng_for(20, 42);
        let mdp = random::mdp(&mut rng, 5, 3, 0.9);
        let pi = random::policy(&mut rng, 5, 3);
        let same = check_theorem1(&mdp, &pi, &pi).unwrap();
        assert!(same.holds);
        assert!(same.slack() >= 0.0);
        assert_abs_diff_eq!(same.lhs, same.surrogate, epsilon = 1e-9);

        let (_, adv) = q_and_advantage(&mdp, &pi).unwrap();
        let greedy = TabularPolicy::greedy(5, 3, &adv).unwrap();
        assert!(check_theorem1(&mdp, &greedy, &pi).unwrap().holds);
    }

    #[test]
    fn theorem2_trivial_and_value_f() {
        let mut rng = rng_for(21, 42);
        let mdp = random::mdp(&mut rng, 5, 3, 0.9);
        let pi = random::policy(&mut rng, 5, 3);
        let pi_new = random::policy(&mut rng, 5, 3);
        let f = random::state_fn(&mut rng, 5, 2.0);
        let saf = state_action_fn_from_f(&mdp, &f).unwrap();
        let same = check_theorem2(&mdp, &pi, &pi, &saf, false).unwrap();
        assert!(same.holds);
        assert_abs_diff_eq!(same.lhs, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(same.surrogate, 0.0, epsilon = 1e-10);
        assert!(same.penalty >= 0.0);

        // f = V_pi makes the advantage average to zero in every state.
        let v = solve_value(&mdp, &pi).unwrap();
        let saf_v = state_action_fn_from_f(&mdp, &v).unwrap();
        let rep = check_theorem2(&mdp, &pi_new, &pi, &saf_v, false).unwrap();
        assert!(rep.epsilon_term.abs() <= 1e-10);
        assert!(rep.holds);
    }

    #[test]
    fn mdp_validation_rejects_bad_inputs() {
        assert!(Mdp::new(1, 1, vec![0.9], vec![1.0], vec![1.0], 0.9).is_err());
        assert!(Mdp::new(1, 1, vec![1.0], vec![1.0], vec![0.5], 0.9).is_err());
        assert!(Mdp::new(1, 1, vec![1.0], vec![1.0], vec![1.0], 1.0).is_err());
        assert!(Mdp::new(1, 1, vec![1.0], vec![1.0], vec![1.0], -0.1).is_err());
        assert!(TabularPolicy::new(1, 2, vec![0.7, 0.7]).is_err());
        assert!(TabularPolicy::new(1, 2, vec![1.5, -0.5]).is_err());
        // Dimension mismatch between policy and MDP.
        let mdp = Mdp::new(1, 1, vec![1.0], vec![1.0], vec![1.0], 0.5).unwrap();
        let pi = TabularPolicy::uniform(2, 1);
        assert!(solve_value(&mdp, &pi).is_err());
    }
}
