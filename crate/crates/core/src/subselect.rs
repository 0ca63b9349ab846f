//! Exact optimization of the selection indicators with classifier outcomes
//! fixed.
//!
//! All routines minimize `sum_i z_i * c_i + rho * F(z)` over binary `z`,
//! where `c_i` is the per-point unit cost derived from the scores and `F`
//! is the fairness measure named by the spec. The group-based measures
//! split the absolute value into its two sign cases; within a case the
//! problem separates by group and is solved by sorting and prefix sums.

use crate::data::{FairnessKind, FairnessSpec, OneHotSelection};
use crate::error::{Error, Result};
use crate::fairness;
use crate::model::{HyperParams, ScoreMatrix, Scores};
use crate::scalar::Scalar;

/// Result of a selection solve: the indicators and the optimal value of the
/// restricted objective (accuracy term plus `rho * F`, regularization
/// excluded since it is constant in `z`).
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome<T> {
    pub z: Vec<bool>,
    pub value: T,
}

/// Cost list of one index subset, sorted ascending with ties broken by the
/// original index, plus prefix sums of the sorted costs.
struct SortedCosts<T> {
    order: Vec<usize>,
    costs: Vec<T>,
    prefix: Vec<T>,
}

impl<T: Scalar> SortedCosts<T> {
    fn build(mut items: Vec<(usize, T)>) -> Self {
        items.sort_unstable_by(|a, b| a.1.partial_cmp(&b.1).expect("finite costs").then(a.0.cmp(&b.0)));
        let order: Vec<usize> = items.iter().map(|&(i, _)| i).collect();
        let costs: Vec<T> = items.iter().map(|&(_, c)| c).collect();
        let mut prefix = Vec::with_capacity(costs.len() + 1);
        let mut acc = T::zero();
        prefix.push(acc);
        for &c in &costs {
            acc += c;
            prefix.push(acc);
        }
        Self { order, costs, prefix }
    }

    fn len(&self) -> usize {
        self.order.len()
    }

    /// Number of sorted costs strictly below `bound`.
    fn count_below(&self, bound: T) -> usize {
        self.costs.partition_point(|&c| c < bound)
    }
}

/// Best counts for the two-sided group measure: enumerate the group -1
/// count, solve each sign case of the absolute value in closed form, and
/// keep the overall minimum. Returns `(k_plus, k_minus, value)`.
fn two_case_minimize<T: Scalar>(plus: &SortedCosts<T>, minus: &SortedCosts<T>, rho: T) -> (usize, usize, T) {
    let dp = plus.len();
    let dm = minus.len();
    let dp_t = T::from_count(dp);
    let dm_t = T::from_count(dm);
    // Unconstrained optimal counts in the plus group for each case: items
    // whose case-adjusted cost is strictly negative.
    let forced_case1 = plus.count_below(rho / dp_t);
    let forced_case2 = plus.count_below(-(rho / dp_t));

    let mut best: Option<(T, usize, usize)> = None;
    for k_minus in 0..=dm {
        let km_t = T::from_count(k_minus);
        let minus_base = minus.prefix[k_minus];

        // Case 1: plus rate at most minus rate.
        let cap = k_minus * dp / dm;
        let k1 = cap.min(forced_case1);
        let v1 = plus.prefix[k1] - rho * T::from_count(k1) / dp_t + minus_base + rho * km_t / dm_t;
        // Case 2: plus rate at least minus rate.
        let lo = (k_minus * dp + dm - 1) / dm;
        let k2 = lo.max(forced_case2);
        let v2 = plus.prefix[k2] + rho * T::from_count(k2) / dp_t + minus_base - rho * km_t / dm_t;

        for (v, k) in [(v1, k1), (v2, k2)] {
            if best.map_or(true, |(bv, _, _)| v < bv) {
                best = Some((v, k, k_minus));
            }
        }
    }
    let (value, k_plus, k_minus) = best.expect("loop runs at least once");
    (k_plus, k_minus, value)
}

fn check_scores<T: Scalar>(u: &Scores<T>, spec: &FairnessSpec, h: &HyperParams<T>) -> Result<()> {
    if u.len() != spec.n_points() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} points",
            u.len(),
            spec.n_points()
        )));
    }
    if !(h.rho >= T::zero()) {
        return Err(Error::InvalidInput("rho must be >= 0".into()));
    }
    Ok(())
}

/// Exact minimizer for the overall-misclassification-rate measure in
/// `O(N log N)`.
pub fn select_omr<T: Scalar>(u: &Scores<T>, spec: &FairnessSpec, h: &HyperParams<T>) -> Result<SelectionOutcome<T>> {
    check_scores(u, spec, h)?;
    if spec.d_plus.is_empty() || spec.d_minus.is_empty() {
        return Err(Error::EmptyGroup("protected group"));
    }
    let n_t = T::from_count(spec.n_points());
    let cost = |&i: &usize| (i, u.unit_cost(i, h.t, n_t));
    let plus = SortedCosts::build(spec.d_plus.iter().map(cost).collect());
    let minus = SortedCosts::build(spec.d_minus.iter().map(cost).collect());
    let (kp, km, value) = two_case_minimize(&plus, &minus, h.rho);
    let mut z = vec![false; spec.n_points()];
    for &i in &plus.order[..kp] {
        z[i] = true;
    }
    for &i in &minus.order[..km] {
        z[i] = true;
    }
    Ok(SelectionOutcome { z, value })
}

/// Shared body of the conditional measures: points outside the two fairness
/// subsets are free and selected exactly when their cost is negative; the
/// subsets run the two-case enumeration.
fn select_conditional<T: Scalar>(
    u: &Scores<T>,
    spec: &FairnessSpec,
    h: &HyperParams<T>,
    subset_plus: &[usize],
    subset_minus: &[usize],
    empty_msg: &'static str,
) -> Result<SelectionOutcome<T>> {
    check_scores(u, spec, h)?;
    if subset_plus.is_empty() || subset_minus.is_empty() {
        return Err(Error::EmptyGroup(empty_msg));
    }
    let n = spec.n_points();
    let n_t = T::from_count(n);
    let mut in_subset = vec![false; n];
    for &i in subset_plus.iter().chain(subset_minus) {
        in_subset[i] = true;
    }
    let mut z = vec![false; n];
    let mut value = T::zero();
    for i in 0..n {
        if !in_subset[i] {
            let c = u.unit_cost(i, h.t, n_t);
            if c < T::zero() {
                z[i] = true;
                value += c;
            }
        }
    }
    let cost = |&i: &usize| (i, u.unit_cost(i, h.t, n_t));
    let plus = SortedCosts::build(subset_plus.iter().map(cost).collect());
    let minus = SortedCosts::build(subset_minus.iter().map(cost).collect());
    let (kp, km, sub_value) = two_case_minimize(&plus, &minus, h.rho);
    for &i in &plus.order[..kp] {
        z[i] = true;
    }
    for &i in &minus.order[..km] {
        z[i] = true;
    }
    Ok(SelectionOutcome { z, value: value + sub_value })
}

/// Exact minimizer for the false-positive-rate measure.
pub fn select_fpr<T: Scalar>(u: &Scores<T>, spec: &FairnessSpec, h: &HyperParams<T>) -> Result<SelectionOutcome<T>> {
    select_conditional(u, spec, h, &spec.d_pm, &spec.d_mm, "negative-label subset of a group")
}

/// Exact minimizer for the equal-opportunity measure.
pub fn select_eo<T: Scalar>(u: &Scores<T>, spec: &FairnessSpec, h: &HyperParams<T>) -> Result<SelectionOutcome<T>> {
    select_conditional(u, spec, h, &spec.d_pp, &spec.d_mp, "positive-label subset of a group")
}

/// Per-group cost table for the demographic-parity solve: `table[p]` is the
/// cheapest way to realize exactly `p` positive predictions in the group,
/// and `pick[p]` the pair (ones among positive-label points, ones among
/// negative-label points) achieving it.
struct GroupTable<T> {
    table: Vec<T>,
    pick: Vec<(usize, usize)>,
}

fn group_table<T: Scalar>(pos: &SortedCosts<T>, neg: &SortedCosts<T>) -> GroupTable<T> {
    let np = pos.len();
    let nn = neg.len();
    let size = np + nn;
    let mut table = Vec::with_capacity(size + 1);
    let mut pick = Vec::with_capacity(size + 1);
    for p in 0..=size {
        let j_lo = p.saturating_sub(nn);
        let j_hi = np.min(p);
        let mut best_cost = T::infinity();
        let mut best_pair = (0usize, 0usize);
        for j in j_lo..=j_hi {
            let m = j + nn - p;
            let c = pos.prefix[j] + neg.prefix[m];
            if c < best_cost {
                best_cost = c;
                best_pair = (j, m);
            }
        }
        table.push(best_cost);
        pick.push(best_pair);
    }
    GroupTable { table, pick }
}

/// Exact minimizer for the demographic-parity measure, `O(N^2)`.
///
/// For each sign case of the absolute value the penalty is linear in `z`,
/// so it folds into per-item adjusted costs; the coupling constraint
/// between the groups' positive-prediction rates is handled by enumerating
/// the group -1 count against running minima of the group +1 table.
pub fn select_dp<T: Scalar>(u: &Scores<T>, spec: &FairnessSpec, h: &HyperParams<T>) -> Result<SelectionOutcome<T>> {
    check_scores(u, spec, h)?;
    if spec.d_plus.is_empty() || spec.d_minus.is_empty() {
        return Err(Error::EmptyGroup("protected group"));
    }
    let n = spec.n_points();
    let n_t = T::from_count(n);
    let dp_count = spec.d_plus.len();
    let dm_count = spec.d_minus.len();
    let dp_t = T::from_count(dp_count);
    let dm_t = T::from_count(dm_count);
    let rho = h.rho;

    let base_cost = |&i: &usize| (i, u.unit_cost(i, h.t, n_t));
    // `sign = +1` is the case where the group +1 positive rate is on the
    // negative side of the absolute value.
    let build_case = |sign: T| {
        let adj = |items: &[usize], delta: T| -> SortedCosts<T> {
            SortedCosts::build(items.iter().map(base_cost).map(|(i, c)| (i, c + delta)).collect())
        };
        let plus = group_table(
            &adj(&spec.d_pp, -sign * rho / dp_t),
            &adj(&spec.d_pm, sign * rho / dp_t),
        );
        let minus_pos = adj(&spec.d_mp, sign * rho / dm_t);
        let minus_neg = adj(&spec.d_mm, -sign * rho / dm_t);
        let minus = group_table(&minus_pos, &minus_neg);
        let constant = sign * rho * (T::from_count(spec.d_mm.len()) / dm_t - T::from_count(spec.d_pm.len()) / dp_t);
        (plus, minus, constant)
    };

    // Candidate: (value, case, p_minus, p_plus).
    let mut best: Option<(T, usize, usize, usize)> = None;
    let consider = |v: T, case: usize, pm: usize, pp: usize, best: &mut Option<(T, usize, usize, usize)>| {
        if best.map_or(true, |(bv, _, _, _)| v < bv) {
            *best = Some((v, case, pm, pp));
        }
    };

    let (plus1, minus1, const1) = build_case(T::one());
    {
        // Case 1 couples the rates as P+ / D+ <= P- / D-.
        let mut prefix_min = Vec::with_capacity(plus1.table.len());
        let mut best_so_far = (T::infinity(), 0usize);
        for (p, &c) in plus1.table.iter().enumerate() {
            if c < best_so_far.0 {
                best_so_far = (c, p);
            }
            prefix_min.push(best_so_far);
        }
        for pm in 0..=dm_count {
            let cap = (pm * dp_count / dm_count).min(dp_count);
            let (pc, pp) = prefix_min[cap];
            let v = minus1.table[pm] + pc + const1;
            consider(v, 1, pm, pp, &mut best);
        }
    }
    let (plus2, minus2, const2) = build_case(-T::one());
    {
        // Case 2: P+ / D+ >= P- / D-.
        let mut suffix_min = vec![(T::infinity(), 0usize); plus2.table.len()];
        let mut best_so_far = (T::infinity(), 0usize);
        for p in (0..plus2.table.len()).rev() {
            let c = plus2.table[p];
            if c < best_so_far.0 {
                best_so_far = (c, p);
            }
            suffix_min[p] = best_so_far;
        }
        for pm in 0..=dm_count {
            let lo = (pm * dp_count + dm_count - 1) / dm_count;
            if lo > dp_count {
                continue;
            }
            let (pc, pp) = suffix_min[lo];
            let v = minus2.table[pm] + pc + const2;
            consider(v, 2, pm, pp, &mut best);
        }
    }

    let (value, case, pm, pp) = best.expect("case 1 always yields candidates");
    let (plus, minus) = if case == 1 { (&plus1, &minus1) } else { (&plus2, &minus2) };
    let sign = if case == 1 { T::one() } else { -T::one() };
    // Rebuild the sorted subset orders for the winning case to materialize z.
    let adj = |items: &[usize], delta: T| -> SortedCosts<T> {
        SortedCosts::build(items.iter().map(base_cost).map(|(i, c)| (i, c + delta)).collect())
    };
    let mut z = vec![false; n];
    let mark = |sorted: &SortedCosts<T>, count: usize, z: &mut Vec<bool>| {
        for &i in &sorted.order[..count] {
            z[i] = true;
        }
    };
    let (jp, mp) = plus.pick[pp];
    mark(&adj(&spec.d_pp, -sign * rho / dp_t), jp, &mut z);
    mark(&adj(&spec.d_pm, sign * rho / dp_t), mp, &mut z);
    let (jm, mm) = minus.pick[pm];
    mark(&adj(&spec.d_mp, sign * rho / dm_t), jm, &mut z);
    mark(&adj(&spec.d_mm, -sign * rho / dm_t), mm, &mut z);
    Ok(SelectionOutcome { z, value })
}

/// Exact minimizer for the F1-complement objective in `O(N log N)`.
///
/// Enumerates the selected-negative count; for each, the positives are
/// filled greedily in cost order and the optimal count is found by
/// bisection on the marginal condition, which is monotone because the
/// sorted costs are nondecreasing and the penalty increments of a convex
/// decreasing function are nondecreasing.
pub fn select_f1<T: Scalar>(u: &Scores<T>, spec: &FairnessSpec, h: &HyperParams<T>) -> Result<SelectionOutcome<T>> {
    check_scores(u, spec, h)?;
    if spec.n_plus.is_empty() {
        return Err(Error::EmptyGroup("positive-label points (F1 undefined)"));
    }
    let n = spec.n_points();
    let np = spec.n_plus.len();
    let nm = spec.n_minus.len();
    let np_t = T::from_count(np);
    let cost_pos = |&i: &usize| (i, u.unit_cost(i, h.t, np_t));
    let plus = SortedCosts::build(spec.n_plus.iter().map(cost_pos).collect());
    let minus = if nm > 0 {
        let nm_t = T::from_count(nm);
        let cost_neg = |&i: &usize| (i, u.unit_cost(i, h.t, nm_t));
        SortedCosts::build(spec.n_minus.iter().map(cost_neg).collect())
    } else {
        SortedCosts::build(Vec::new())
    };
    let rho = h.rho;
    let n_t = T::from_count(n);
    // penalty(k_plus, k_minus) = rho * (N - k+ - k-) / (N + k+ - k-).
    let penalty = |kp: usize, km: usize| -> T {
        rho * (n_t - T::from_count(kp) - T::from_count(km)) / (n_t + T::from_count(kp) - T::from_count(km))
    };

    let mut best: Option<(T, usize, usize)> = None;
    for km in 0..=nm {
        // Largest k with marginal gain still strictly negative.
        let delta_neg = |k: usize| -> bool {
            plus.costs[k - 1] + penalty(k, km) - penalty(k - 1, km) < T::zero()
        };
        let mut lo = 0usize;
        let mut hi = np;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if delta_neg(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let kp = lo;
        let v = plus.prefix[kp] + minus.prefix[km] + penalty(kp, km);
        if best.map_or(true, |(bv, _, _)| v < bv) {
            best = Some((v, kp, km));
        }
    }
    let (value, kp, km) = best.expect("k_minus = 0 always evaluated");
    let mut z = vec![false; n];
    for &i in &plus.order[..kp] {
        z[i] = true;
    }
    for &i in &minus.order[..km] {
        z[i] = true;
    }
    Ok(SelectionOutcome { z, value })
}

/// Dispatches on the measure named by the spec (binary selections).
pub fn select<T: Scalar>(u: &Scores<T>, spec: &FairnessSpec, h: &HyperParams<T>) -> Result<SelectionOutcome<T>> {
    match spec.kind {
        FairnessKind::Omr => select_omr(u, spec, h),
        FairnessKind::Fpr => select_fpr(u, spec, h),
        FairnessKind::Eo => select_eo(u, spec, h),
        FairnessKind::Dp => select_dp(u, spec, h),
        FairnessKind::F1Complement => select_f1(u, spec, h),
    }
}

/// Objective value `sum_i z_i c_i + rho * F(z)` of an arbitrary selection
/// under the same cost convention as the solvers.
pub fn selection_value<T: Scalar>(u: &Scores<T>, z: &[bool], spec: &FairnessSpec, h: &HyperParams<T>) -> Result<T> {
    if u.len() != z.len() || u.len() != spec.n_points() {
        return Err(Error::DimensionMismatch("scores/selection/spec lengths differ".into()));
    }
    let mut acc = T::zero();
    match spec.kind {
        FairnessKind::F1Complement => {
            let np_t = T::from_count(spec.n_plus.len());
            for &i in &spec.n_plus {
                if z[i] {
                    acc += u.unit_cost(i, h.t, np_t);
                }
            }
            if !spec.n_minus.is_empty() {
                let nm_t = T::from_count(spec.n_minus.len());
                for &i in &spec.n_minus {
                    if z[i] {
                        acc += u.unit_cost(i, h.t, nm_t);
                    }
                }
            }
        }
        _ => {
            let n_t = T::from_count(spec.n_points());
            for (i, &zi) in z.iter().enumerate() {
                if zi {
                    acc += u.unit_cost(i, h.t, n_t);
                }
            }
        }
    }
    Ok(acc + h.rho * fairness::evaluate(z, spec)?)
}

/// Exhaustive minimizer over all `2^N` selections; the validation oracle
/// for the fast routines. Ties go to the lexicographically smallest `z`
/// (low indices first).
pub fn brute_select<T: Scalar>(u: &Scores<T>, spec: &FairnessSpec, h: &HyperParams<T>) -> Result<SelectionOutcome<T>> {
    check_scores(u, spec, h)?;
    let n = spec.n_points();
    if n > 20 {
        return Err(Error::SizeCap(format!("brute-force selection capped at N = 20, got {n}")));
    }
    let mut z = vec![false; n];
    let mut best_value = T::infinity();
    let mut best_mask: u32 = 0;
    for mask in 0u32..(1u32 << n) {
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = mask >> i & 1 == 1;
        }
        let v = selection_value(u, &z, spec, h)?;
        if v < best_value {
            best_value = v;
            best_mask = mask;
        }
    }
    for (i, zi) in z.iter_mut().enumerate() {
        *zi = best_mask >> i & 1 == 1;
    }
    Ok(SelectionOutcome { z, value: best_value })
}

/// Exact minimizer for the multiclass overall-misclassification measure in
/// `O(max(NK, N log N))`.
///
/// Each point contributes a fixed misclassification cost (best wrong label
/// absorbing the largest pairwise score) plus a differential cost when
/// marked correct; the differential problem is the binary two-case
/// enumeration. The returned value includes the fixed base.
pub fn select_omr_multiclass<T: Scalar>(
    u: &ScoreMatrix<T>,
    labels: &[i32],
    spec: &FairnessSpec,
    h: &HyperParams<T>,
) -> Result<(OneHotSelection, T)> {
    if u.len() != labels.len() || u.len() != spec.n_points() {
        return Err(Error::DimensionMismatch("scores/labels/spec lengths differ".into()));
    }
    if !(h.rho >= T::zero()) {
        return Err(Error::InvalidInput("rho must be >= 0".into()));
    }
    if spec.d_plus.is_empty() || spec.d_minus.is_empty() {
        return Err(Error::EmptyGroup("protected group"));
    }
    let n = u.len();
    let k = u.k();
    let n_t = T::from_count(n);
    let mut wrong_label = vec![0usize; n];
    let mut diff_cost = vec![T::zero(); n];
    let mut base = T::zero();
    for i in 0..n {
        let yi = labels[i] as usize;
        if yi < 1 || yi > k {
            return Err(Error::InvalidInput(format!("label {yi} outside 1..={k}")));
        }
        // Best wrong label: argmax of the pairwise scores, ties to the
        // smallest label.
        let mut js = 0usize;
        let mut js_val = T::neg_infinity();
        let mut correct_cost = T::zero();
        for j in 1..=k {
            if j == yi {
                continue;
            }
            let uij = u.get(i, j);
            correct_cost += (uij - h.t) / n_t;
            if uij > js_val {
                js_val = uij;
                js = j;
            }
        }
        let wrong_cost = correct_cost - (js_val - h.t) / n_t;
        wrong_label[i] = js;
        diff_cost[i] = correct_cost - wrong_cost;
        base += wrong_cost;
    }
    let plus = SortedCosts::build(spec.d_plus.iter().map(|&i| (i, diff_cost[i])).collect());
    let minus = SortedCosts::build(spec.d_minus.iter().map(|&i| (i, diff_cost[i])).collect());
    let (kp, km, diff_value) = two_case_minimize(&plus, &minus, h.rho);
    let mut correct = vec![false; n];
    for &i in &plus.order[..kp] {
        correct[i] = true;
    }
    for &i in &minus.order[..km] {
        correct[i] = true;
    }
    let hot: Vec<usize> = (0..n)
        .map(|i| if correct[i] { labels[i] as usize } else { wrong_label[i] })
        .collect();
    Ok((OneHotSelection::new(hot, k)?, base + diff_value))
}

/// Objective value of an arbitrary one-hot assignment under the multiclass
/// accuracy term plus the OMR penalty.
pub fn multiclass_selection_value<T: Scalar>(
    u: &ScoreMatrix<T>,
    z: &OneHotSelection,
    labels: &[i32],
    spec: &FairnessSpec,
    h: &HyperParams<T>,
) -> Result<T> {
    let n = u.len();
    let k = u.k();
    let n_t = T::from_count(n);
    let mut acc = T::zero();
    for i in 0..n {
        let yi = labels[i] as usize;
        for j in 1..=k {
            if j != yi && !z.indicator(i, j) {
                acc += (u.get(i, j) - h.t) / n_t;
            }
        }
    }
    Ok(acc + h.rho * fairness::omr_multiclass(z, labels, spec)?)
}

/// Exhaustive multiclass oracle over all one-hot assignments.
pub fn brute_select_multiclass<T: Scalar>(
    u: &ScoreMatrix<T>,
    labels: &[i32],
    spec: &FairnessSpec,
    h: &HyperParams<T>,
) -> Result<(OneHotSelection, T)> {
    let n = u.len();
    let k = u.k();
    if n > 8 || k > 3 {
        return Err(Error::SizeCap(format!(
            "multiclass brute force capped at N = 8, K = 3; got N = {n}, K = {k}"
        )));
    }
    let mut hot = vec![1usize; n];
    let mut best_hot = hot.clone();
    let mut best_value = T::infinity();
    loop {
        let z = OneHotSelection::new(hot.clone(), k)?;
        let v = multiclass_selection_value(u, &z, labels, spec, h)?;
        if v < best_value {
            best_value = v;
            best_hot = hot.clone();
        }
        // Odometer increment over labels 1..=k.
        let mut pos = 0;
        while pos < n {
            if hot[pos] < k {
                hot[pos] += 1;
                break;
            }
            hot[pos] = 1;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    Ok((OneHotSelection::new(best_hot, k)?, best_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FairnessKind;
    use crate::model::ScoreDirection;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn scores(values: Vec<f64>) -> Scores<f64> {
        Scores::new(values, ScoreDirection::CorrectWhenAtMost).unwrap()
    }

    /// Scores chosen so that the unit cost (u - t) / N reproduces `costs`
    /// exactly: u = t + c * N.
    fn scores_with_costs(costs: &[f64], t: f64) -> Scores<f64> {
        let n = costs.len() as f64;
        scores(costs.iter().map(|c| t + c * n).collect())
    }

    fn params(rho: f64) -> HyperParams<f64> {
        HyperParams::new(0.0, 0.0, rho)
    }

    #[test]
    fn omr_two_point_instance_matches_enumeration() {
        // Costs -0.1 and +0.3, one point per group, rho = 1: selecting
        // nothing is optimal (enumeration over the 4 subsets).
        let spec = FairnessSpec::build(FairnessKind::Omr, &[1, 1], &[1, -1]).unwrap();
        let u = scores_with_costs(&[-0.1, 0.3], 1.0);
        let h = HyperParams::new(1.0, 0.0, 1.0);
        let got = select_omr(&u, &spec, &h).unwrap();
        assert_eq!(got.z, vec![false, false]);
        assert!(got.value.abs() < 1e-12);
    }

    #[test]
    fn rho_zero_is_pure_thresholding() {
        let spec = FairnessSpec::build(
            FairnessKind::Omr,
            &[1, 1, -1, -1, 1, -1],
            &[1, 1, 1, -1, -1, -1],
        )
        .unwrap();
        let costs = [-0.5, 0.2, 0.0, -0.1, 0.4, -0.3];
        let u = scores_with_costs(&costs, 1.0);
        let h = HyperParams::new(1.0, 0.0, 0.0);
        let got = select_omr(&u, &spec, &h).unwrap();
        let want: Vec<bool> = costs.iter().map(|&c| c < 0.0).collect();
        assert_eq!(got.z, want);
    }

    #[test]
    fn rejects_negative_rho_and_empty_group() {
        let spec = FairnessSpec::build(FairnessKind::Omr, &[1, -1], &[1, -1]).unwrap();
        let u = scores(vec![0.1, 0.2]);
        let mut h = params(0.0);
        h.rho = -1.0;
        assert!(select_omr(&u, &spec, &h).is_err());
        // Single-group data cannot even build an OMR spec.
        assert!(FairnessSpec::build(FairnessKind::Omr, &[1, -1], &[1, 1]).is_err());
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> (Vec<i32>, Vec<i8>, Scores<f64>) {
        loop {
            let labels: Vec<i32> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            let groups: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            // All four cells nonempty so every measure applies.
            let mut cells = [0usize; 4];
            for i in 0..n {
                let c = (labels[i] == 1) as usize * 2 + (groups[i] == 1) as usize;
                cells[c] += 1;
            }
            if cells.iter().all(|&c| c > 0) {
                let u = scores((0..n).map(|_| rng.gen_range(0.0..2.0)).collect());
                return (labels, groups, u);
            }
        }
    }

    #[test]
    fn fast_routines_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let n = rng.gen_range(6..=12);
            let (labels, groups, u) = random_instance(&mut rng, n);
            let rho = [0.0, 0.1, 1.0, 10.0][trial % 4];
            let h = HyperParams::new(rng.gen_range(0.2..1.5), 0.0, rho);
            for kind in [
                FairnessKind::Omr,
                FairnessKind::Fpr,
                FairnessKind::Eo,
                FairnessKind::Dp,
                FairnessKind::F1Complement,
            ] {
                let spec = FairnessSpec::build(kind, &labels, &groups).unwrap();
                let fast = select(&u, &spec, &h).unwrap();
                let brute = brute_select(&u, &spec, &h).unwrap();
                assert!(
                    (fast.value - brute.value).abs() <= 1e-9,
                    "trial {trial} kind {kind:?}: fast {} vs brute {}",
                    fast.value,
                    brute.value
                );
                // The reported value matches the objective recomputed from z.
                let recomputed = selection_value(&u, &fast.z, &spec, &h).unwrap();
                assert!((fast.value - recomputed).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn selected_items_form_cost_prefixes_within_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 12;
            let (labels, groups, u) = random_instance(&mut rng, n);
            let h = HyperParams::new(1.0, 0.0, 0.7);
            let spec = FairnessSpec::build(FairnessKind::Omr, &labels, &groups).unwrap();
            let got = select_omr(&u, &spec, &h).unwrap();
            for subset in [&spec.d_plus, &spec.d_minus] {
                let mut items: Vec<(f64, usize)> =
                    subset.iter().map(|&i| (u.unit_cost(i, h.t, n as f64), i)).collect();
                items.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let count = subset.iter().filter(|&&i| got.z[i]).count();
                for (rank, &(_, i)) in items.iter().enumerate() {
                    assert_eq!(got.z[i], rank < count, "selection must be a sorted prefix");
                }
            }
        }
    }

    #[test]
    fn scaling_costs_and_rho_preserves_argmin() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let (labels, groups, u) = random_instance(&mut rng, 10);
            let h = HyperParams::new(1.0, 0.0, 0.5);
            let spec = FairnessSpec::build(FairnessKind::Omr, &labels, &groups).unwrap();
            let base = select_omr(&u, &spec, &h).unwrap();
            // Scale scores around t by 3 and rho by 3: costs scale together.
            let scaled_u = scores(u.values.iter().map(|&v| h.t + (v - h.t) * 3.0).collect());
            let scaled_h = HyperParams::new(1.0, 0.0, 1.5);
            let scaled = select_omr(&scaled_u, &spec, &scaled_h).unwrap();
            let value_of_scaled_z = selection_value(&u, &scaled.z, &spec, &h).unwrap();
            assert!((value_of_scaled_z - base.value).abs() < 1e-12);
        }
    }

    #[test]
    fn determinism_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (labels, groups, u) = random_instance(&mut rng, 14);
        let h = HyperParams::new(0.8, 0.0, 0.3);
        let spec = FairnessSpec::build(FairnessKind::Dp, &labels, &groups).unwrap();
        let a = select_dp(&u, &spec, &h).unwrap();
        let b = select_dp(&u, &spec, &h).unwrap();
        assert_eq!(a.z, b.z);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn conditional_measures_leave_costly_free_points_unselected() {
        // Outside the FPR subsets all costs are positive, so no rho can
        // force those points in.
        let labels = [1, 1, -1, -1];
        let groups = [1, -1, 1, -1];
        let spec = FairnessSpec::build(FairnessKind::Fpr, &labels, &groups).unwrap();
        let u = scores_with_costs(&[0.5, 0.9, -0.2, -0.4], 1.0);
        let h = HyperParams::new(1.0, 0.0, 50.0);
        let got = select_fpr(&u, &spec, &h).unwrap();
        assert!(!got.z[0] && !got.z[1]);
    }

    #[test]
    fn dp_large_rho_prefers_fair_full_selection() {
        let labels = [1, -1, 1, -1];
        let groups = [1, 1, -1, -1];
        let spec = FairnessSpec::build(FairnessKind::Dp, &labels, &groups).unwrap();
        let u = scores_with_costs(&[-1.0, -1.0, -1.0, -1.0], 1.0);
        let h = HyperParams::new(1.0, 0.0, 100.0);
        let got = select_dp(&u, &spec, &h).unwrap();
        assert_eq!(got.z, vec![true; 4]);
        assert!((got.value + 4.0).abs() < 1e-12);
    }

    #[test]
    fn f1_tiny_enumeration() {
        // One positive with cost -0.5, one negative with cost +0.1, rho 0.2.
        // Enumeration: {} -> 0.2, {pos} -> -0.4333.., {neg} -> 0.3,
        // {pos, neg} -> -0.4. Optimum selects the positive only.
        let labels = [1, -1];
        let groups = [1, -1];
        let spec = FairnessSpec::build(FairnessKind::F1Complement, &labels, &groups).unwrap();
        // Costs are (u - t) / N_plus and (u - t) / N_minus with N_+ = N_- = 1.
        let u = scores(vec![1.0 - 0.5, 1.0 + 0.1]);
        let h = HyperParams::new(1.0, 0.0, 0.2);
        let got = select_f1(&u, &spec, &h).unwrap();
        let brute = brute_select(&u, &spec, &h).unwrap();
        assert_eq!(got.z, brute.z);
        assert_eq!(got.z, vec![true, false]);
        let expected = -0.5 + 0.2 * (2.0 - 1.0) / (2.0 + 1.0);
        assert!((got.value - expected).abs() < 1e-12);
        assert!((brute.value - expected).abs() < 1e-12);
    }

    #[test]
    fn brute_size_cap() {
        let labels: Vec<i32> = (0..21).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let groups: Vec<i8> = (0..21).map(|i| if i < 10 { 1 } else { -1 }).collect();
        let spec = FairnessSpec::build(FairnessKind::Omr, &labels, &groups).unwrap();
        let u = scores(vec![0.5; 21]);
        assert!(matches!(
            brute_select(&u, &spec, &params(0.1)),
            Err(Error::SizeCap(_))
        ));
    }

    fn random_multiclass(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (Vec<i32>, Vec<i8>, ScoreMatrix<f64>) {
        loop {
            let labels: Vec<i32> = (0..n).map(|_| rng.gen_range(1..=k as i32)).collect();
            let groups: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            if groups.iter().any(|&g| g == 1) && groups.iter().any(|&g| g == -1) {
                let values: Vec<f64> = (0..n * k).map(|_| rng.gen_range(0.0..2.0)).collect();
                return (labels, groups, ScoreMatrix::new(values, k).unwrap());
            }
        }
    }

    #[test]
    fn multiclass_matches_full_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..30 {
            let n = rng.gen_range(4..=6);
            let (labels, groups, u) = random_multiclass(&mut rng, n, 3);
            let h = HyperParams::new(rng.gen_range(0.2..1.2), 0.0, [0.0, 0.3, 2.0][trial % 3]);
            let spec = FairnessSpec::build(FairnessKind::Omr, &labels, &groups).unwrap();
            let (fast_z, fast_v) = select_omr_multiclass(&u, &labels, &spec, &h).unwrap();
            let (_, brute_v) = brute_select_multiclass(&u, &labels, &spec, &h).unwrap();
            assert!(
                (fast_v - brute_v).abs() <= 1e-9,
                "trial {trial}: fast {fast_v} vs brute {brute_v}"
            );
            let recomputed = multiclass_selection_value(&u, &fast_z, &labels, &spec, &h).unwrap();
            assert!((fast_v - recomputed).abs() <= 1e-9);
        }
    }

    #[test]
    fn multiclass_restricted_rows_cover_the_optimum() {
        // Unselected rows must be hot at the max-margin wrong label; check
        // the fast value also matches enumeration restricted to
        // {y_i, best wrong label}.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let n = 10;
            let (labels, groups, u) = random_multiclass(&mut rng, n, 3);
            let h = HyperParams::new(0.7, 0.0, 0.5);
            let spec = FairnessSpec::build(FairnessKind::Omr, &labels, &groups).unwrap();
            let (_, fast_v) = select_omr_multiclass(&u, &labels, &spec, &h).unwrap();

            let wrong: Vec<usize> = (0..n)
                .map(|i| {
                    let yi = labels[i] as usize;
                    (1..=3)
                        .filter(|&j| j != yi)
                        .max_by(|&a, &b| u.get(i, a).partial_cmp(&u.get(i, b)).unwrap().then(b.cmp(&a)))
                        .unwrap()
                })
                .collect();
            let mut best = f64::INFINITY;
            for mask in 0u32..(1 << n) {
                let hot: Vec<usize> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { labels[i] as usize } else { wrong[i] })
                    .collect();
                let z = OneHotSelection::new(hot, 3).unwrap();
                let v = multiclass_selection_value(&u, &z, &labels, &spec, &h).unwrap();
                if v < best {
                    best = v;
                }
            }
            assert!((fast_v - best).abs() <= 1e-9);
        }
    }

    #[test]
    fn multiclass_k2_reduces_to_binary_selection() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let n = 8;
            let (labels2, groups, _) = random_instance(&mut rng, n);
            // Build a K = 2 problem: label 1 = positive, label 2 = negative.
            let labels_mc: Vec<i32> = labels2.iter().map(|&y| if y == 1 { 1 } else { 2 }).collect();
            let margins: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            // Pairwise score against the single wrong label.
            let mut values = vec![0.0; n * 2];
            for i in 0..n {
                let yi = labels_mc[i] as usize;
                let wrong = 3 - yi;
                values[i * 2 + (yi - 1)] = 1.0; // diagonal entry, unused
                values[i * 2 + (wrong - 1)] = margins[i];
            }
            let u_mc = ScoreMatrix::new(values, 2).unwrap();
            let u_bin = scores(margins.clone());
            let h = HyperParams::new(0.6, 0.0, 0.4);
            let spec = FairnessSpec::build(FairnessKind::Omr, &labels2, &groups).unwrap();
            let (_, v_mc) = select_omr_multiclass(&u_mc, &labels_mc, &spec, &h).unwrap();
            let v_bin = select_omr(&u_bin, &spec, &h).unwrap().value;
            // With K = 2 the misclassification base cost is zero, so the
            // values agree directly.
            assert!((v_mc - v_bin).abs() <= 1e-9);
        }
    }
}
