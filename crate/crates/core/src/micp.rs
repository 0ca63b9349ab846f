//! Exportable mixed-integer convex models of the penalized training
//! problems, plus their closed-form constants.
//!
//! Models serialize to a self-describing JSON document (see the field
//! names on the types below; `obj.constant` carries the fixed objective
//! offset of the multiclass model). A best-effort CPLEX-LP writer covers
//! models without cone rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FairnessKind, FairnessSpec};
use crate::error::{Error, Result};
use crate::model::HyperParams;
use crate::scalar::Scalar;

/// Coefficients smaller than this are dropped by the LP writer.
pub const LP_COEFF_FLOOR: f64 = 1e-17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
    /// `None` is unbounded on that side.
    pub lb: Option<f64>,
    pub ub: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinRow {
    pub coeffs: BTreeMap<String, f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadTerm {
    pub name1: String,
    pub name2: String,
    pub coef: f64,
}

/// Rotated-quadratic-cone row: `t * u >= sum_j x_j^2` with `t, u >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotatedCone {
    pub t: String,
    pub u: String,
    pub x: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub coeffs: BTreeMap<String, f64>,
    pub sense: String,
    /// Fixed offset added to the linear and quadratic terms.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicpModel {
    pub vars: Vec<Var>,
    pub linear: Vec<LinRow>,
    pub qobj: Vec<QuadTerm>,
    pub rcones: Vec<RotatedCone>,
    pub obj: Objective,
}

impl MicpModel {
    fn new() -> Self {
        Self {
            vars: Vec::new(),
            linear: Vec::new(),
            qobj: Vec::new(),
            rcones: Vec::new(),
            obj: Objective { coeffs: BTreeMap::new(), sense: "min".into(), constant: 0.0 },
        }
    }

    fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lb: Option<f64>, ub: Option<f64>) {
        let name = name.into();
        let (lb, ub) = match kind {
            VarKind::Binary => (Some(0.0), Some(1.0)),
            VarKind::Continuous => (lb, ub),
        };
        self.vars.push(Var { name, kind, lb, ub });
    }

    fn add_row(&mut self, coeffs: Vec<(String, f64)>, sense: Sense, rhs: f64) {
        let mut map = BTreeMap::new();
        for (name, c) in coeffs {
            *map.entry(name).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        self.linear.push(LinRow { coeffs: map, sense, rhs });
    }

    fn add_obj(&mut self, name: impl Into<String>, coef: f64) {
        if coef != 0.0 {
            *self.obj.coeffs.entry(name.into()).or_insert(0.0) += coef;
        }
    }

    /// Structural invariants: declared names unique, every reference
    /// resolves, binary bounds are `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::BTreeSet::new();
        for v in &self.vars {
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate variable {}", v.name)));
            }
            if v.kind == VarKind::Binary && (v.lb != Some(0.0) || v.ub != Some(1.0)) {
                return Err(Error::InvalidInput(format!("binary {} must have bounds [0, 1]", v.name)));
            }
        }
        let check = |name: &str| -> Result<()> {
            if names.contains(name) {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("undeclared variable {name}")))
            }
        };
        for row in &self.linear {
            for name in row.coeffs.keys() {
                check(name)?;
            }
        }
        for q in &self.qobj {
            check(&q.name1)?;
            check(&q.name2)?;
        }
        for c in &self.rcones {
            check(&c.t)?;
            check(&c.u)?;
            for x in &c.x {
                check(x)?;
            }
        }
        for name in self.obj.coeffs.keys() {
            check(name)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("model parse: {e}")))
    }

    fn lookup(assign: &BTreeMap<String, f64>, name: &str) -> Result<f64> {
        assign
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("assignment misses variable {name}")))
    }

    /// Total objective (linear + quadratic + constant) at an assignment.
    pub fn objective_value(&self, assign: &BTreeMap<String, f64>) -> Result<f64> {
        let mut total = self.obj.constant;
        for (name, c) in &self.obj.coeffs {
            total += c * Self::lookup(assign, name)?;
        }
        for q in &self.qobj {
            total += q.coef * Self::lookup(assign, &q.name1)? * Self::lookup(assign, &q.name2)?;
        }
        Ok(total)
    }

    /// Checks bounds, integrality, linear rows, and cone rows at an
    /// assignment, within `tol`.
    pub fn is_feasible(&self, assign: &BTreeMap<String, f64>, tol: f64) -> Result<bool> {
        for v in &self.vars {
            let x = Self::lookup(assign, &v.name)?;
            if let Some(lb) = v.lb {
                if x < lb - tol {
                    return Ok(false);
                }
            }
            if let Some(ub) = v.ub {
                if x > ub + tol {
                    return Ok(false);
                }
            }
            if v.kind == VarKind::Binary && (x - x.round()).abs() > tol {
                return Ok(false);
            }
        }
        for row in &self.linear {
            let mut lhs = 0.0;
            for (name, c) in &row.coeffs {
                lhs += c * Self::lookup(assign, name)?;
            }
            let ok = match row.sense {
                Sense::Le => lhs <= row.rhs + tol,
                Sense::Eq => (lhs - row.rhs).abs() <= tol,
                Sense::Ge => lhs >= row.rhs - tol,
            };
            if !ok {
                return Ok(false);
            }
        }
        for cone in &self.rcones {
            let t = Self::lookup(assign, &cone.t)?;
            let u = Self::lookup(assign, &cone.u)?;
            if t < -tol || u < -tol {
                return Ok(false);
            }
            let mut sq = 0.0;
            for x in &cone.x {
                let v = Self::lookup(assign, x)?;
                sq += v * v;
            }
            if t * u + tol < sq {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// CPLEX-LP text for models without cone rows. Quadratic objective
    /// terms use the bracketed `[ ... ] / 2` extension; coefficients below
    /// [`LP_COEFF_FLOOR`] are dropped; variables keep declaration order.
    pub fn write_lp(&self) -> Result<String> {
        if !self.rcones.is_empty() {
            return Err(Error::InvalidInput(
                "LP format cannot express cone rows; use the JSON document".into(),
            ));
        }
        self.validate()?;
        let keep = |c: f64| c.abs() >= LP_COEFF_FLOOR;
        let mut out = String::new();
        out.push_str("\\ fairsel model export\nMinimize\n obj:");
        // Deterministic declaration-order iteration over objective terms.
        let mut wrote = false;
        for v in &self.vars {
            if let Some(&c) = self.obj.coeffs.get(&v.name) {
                if keep(c) {
                    let _ = write!(out, " {} {}", sign_mag(c, wrote), v.name);
                    wrote = true;
                }
            }
        }
        if !self.qobj.is_empty() {
            out.push_str(" + [");
            let mut first = true;
            for q in &self.qobj {
                let doubled = 2.0 * q.coef;
                if !keep(doubled) {
                    continue;
                }
                let _ = write!(out, " {}", sign_mag(doubled, !first));
                if q.name1 == q.name2 {
                    let _ = write!(out, " {} ^2", q.name1);
                } else {
                    let _ = write!(out, " {} * {}", q.name1, q.name2);
                }
                first = false;
            }
            out.push_str(" ] / 2");
            wrote = true;
        }
        if !wrote {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for (idx, row) in self.linear.iter().enumerate() {
            let _ = write!(out, " c{idx}:");
            let mut first = true;
            for v in &self.vars {
                if let Some(&c) = row.coeffs.get(&v.name) {
                    if keep(c) {
                        let _ = write!(out, " {} {}", sign_mag(c, !first), v.name);
                        first = false;
                    }
                }
            }
            if first {
                out.push_str(" 0");
            }
            let sense = match row.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            let _ = writeln!(out, " {} {}", sense, row.rhs);
        }
        out.push_str("Bounds\n");
        for v in &self.vars {
            if v.kind == VarKind::Binary {
                continue; // implied by the Binaries section
            }
            match (v.lb, v.ub) {
                (None, None) => {
                    let _ = writeln!(out, " {} free", v.name);
                }
                (Some(lb), None) => {
                    let _ = writeln!(out, " {} >= {}", v.name, lb);
                }
                (None, Some(ub)) => {
                    let _ = writeln!(out, " -inf <= {} <= {}", v.name, ub);
                }
                (Some(lb), Some(ub)) => {
                    let _ = writeln!(out, " {} <= {} <= {}", lb, v.name, ub);
                }
            }
        }
        let binaries: Vec<&str> = self
            .vars
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.name.as_str())
            .collect();
        if !binaries.is_empty() {
            out.push_str("Binaries\n ");
            out.push_str(&binaries.join(" "));
            out.push('\n');
        }
        out.push_str("End\n");
        Ok(out)
    }
}

fn sign_mag(c: f64, with_plus: bool) -> String {
    if c < 0.0 {
        format!("- {}", -c)
    } else if with_plus {
        format!("+ {}", c)
    } else {
        format!("{}", c)
    }
}

/// Big-M bound on the optimal violation margins:
/// `2 + 2 sqrt(t / lambda) * max_i |x_i|`.
pub fn big_m<T: Scalar>(h: &HyperParams<T>, data: &Dataset<T>) -> Result<T> {
    if !(h.lambda > T::zero()) {
        return Err(Error::InvalidInput(
            "big-M undefined for lambda = 0; supply an explicit override".into(),
        ));
    }
    if !(h.t > T::zero()) {
        return Err(Error::InvalidInput("big-M requires t > 0".into()));
    }
    let two = T::from_f64_lossy(2.0);
    Ok(two + two * (h.t / h.lambda).sqrt() * data.max_row_norm())
}

/// Smallest attainable positive value of the group-rate difference:
/// `gcd(D+, D-) / (D+ * D-)`, exact.
pub fn s_hat(d_plus: u64, d_minus: u64) -> Result<Ratio<u64>> {
    if d_plus == 0 || d_minus == 0 {
        return Err(Error::InvalidInput("group sizes must be positive".into()));
    }
    Ok(Ratio::new(d_plus.gcd(&d_minus), d_plus * d_minus))
}

fn fairness_expression(spec: &FairnessSpec) -> Result<(Vec<(String, f64)>, f64)> {
    let mut terms: Vec<(String, f64)> = Vec::new();
    let mut constant = 0.0;
    let add = |subset: &[usize], coef: f64, terms: &mut Vec<(String, f64)>| {
        for &i in subset {
            terms.push((format!("z_{i}"), coef));
        }
    };
    match spec.kind {
        FairnessKind::Omr => {
            add(&spec.d_plus, 1.0 / spec.d_plus.len() as f64, &mut terms);
            add(&spec.d_minus, -1.0 / spec.d_minus.len() as f64, &mut terms);
        }
        FairnessKind::Fpr => {
            add(&spec.d_pm, 1.0 / spec.d_pm.len() as f64, &mut terms);
            add(&spec.d_mm, -1.0 / spec.d_mm.len() as f64, &mut terms);
        }
        FairnessKind::Eo => {
            add(&spec.d_pp, 1.0 / spec.d_pp.len() as f64, &mut terms);
            add(&spec.d_mp, -1.0 / spec.d_mp.len() as f64, &mut terms);
        }
        FairnessKind::Dp => {
            let dp = spec.d_plus.len() as f64;
            let dm = spec.d_minus.len() as f64;
            add(&spec.d_pp, 1.0 / dp, &mut terms);
            add(&spec.d_pm, -1.0 / dp, &mut terms);
            add(&spec.d_mp, -1.0 / dm, &mut terms);
            add(&spec.d_mm, 1.0 / dm, &mut terms);
            constant = spec.d_pm.len() as f64 / dp - spec.d_mm.len() as f64 / dm;
        }
        FairnessKind::F1Complement => {
            return Err(Error::InvalidInput(
                "F1 uses the cone builder, not the absolute-value builder".into(),
            ));
        }
    }
    Ok((terms, constant))
}

fn add_hinge_rows<T: Scalar>(model: &mut MicpModel, data: &Dataset<T>) {
    for i in 0..data.len() {
        let y = data.labels()[i] as f64;
        let mut coeffs: Vec<(String, f64)> = data
            .row(i)
            .iter()
            .enumerate()
            .map(|(d, &x)| (format!("w_{d}"), y * x.to_f64().unwrap()))
            .collect();
        coeffs.push(("b".into(), y));
        coeffs.push((format!("u_{i}"), 1.0));
        model.add_row(coeffs, Sense::Ge, 1.0);
    }
}

fn add_mccormick(model: &mut MicpModel, s: &str, u: &str, z: &str, m_u: f64) {
    model.add_row(vec![(s.into(), 1.0), (z.into(), -m_u)], Sense::Le, 0.0);
    model.add_row(vec![(s.into(), 1.0), (u.into(), -1.0)], Sense::Le, 0.0);
    model.add_row(vec![(s.into(), 1.0), (u.into(), -1.0), (z.into(), -m_u)], Sense::Ge, -m_u);
}

fn add_abs_penalty(model: &mut MicpModel, terms: &[(String, f64)], constant: f64, rho: f64) {
    model.add_var("fair", VarKind::Continuous, Some(0.0), None);
    let mut pos: Vec<(String, f64)> = vec![("fair".into(), 1.0)];
    let mut neg: Vec<(String, f64)> = vec![("fair".into(), 1.0)];
    for (name, c) in terms {
        pos.push((name.clone(), -c));
        neg.push((name.clone(), *c));
    }
    model.add_row(pos, Sense::Ge, constant);
    model.add_row(neg, Sense::Ge, -constant);
    model.add_obj("fair", rho);
}

/// Exact model of the penalized hinge objective with a group fairness
/// measure (overall, false-positive-rate, equal-opportunity, or
/// demographic-parity).
pub fn build_gsvmf<T: Scalar>(
    data: &Dataset<T>,
    h: &HyperParams<T>,
    spec: &FairnessSpec,
    mu_override: Option<f64>,
) -> Result<MicpModel> {
    h.validate()?;
    if !data.is_binary() {
        return Err(Error::InvalidInput("binary labels required".into()));
    }
    if spec.n_points() != data.len() {
        return Err(Error::DimensionMismatch("spec built for a different dataset".into()));
    }
    let m_u = match mu_override {
        Some(m) => m,
        None => big_m(h, data)?.to_f64().unwrap(),
    };
    let n = data.len();
    let n_f = n as f64;
    let t = h.t.to_f64().unwrap();
    let mut model = MicpModel::new();
    for d in 0..data.n_features() {
        model.add_var(format!("w_{d}"), VarKind::Continuous, None, None);
    }
    model.add_var("b", VarKind::Continuous, None, None);
    for i in 0..n {
        model.add_var(format!("u_{i}"), VarKind::Continuous, Some(0.0), None);
    }
    for i in 0..n {
        model.add_var(format!("z_{i}"), VarKind::Binary, None, None);
    }
    for i in 0..n {
        model.add_var(format!("s_{i}"), VarKind::Continuous, Some(0.0), None);
    }
    add_hinge_rows(&mut model, data);
    for i in 0..n {
        add_mccormick(&mut model, &format!("s_{i}"), &format!("u_{i}"), &format!("z_{i}"), m_u);
    }
    let (terms, constant) = fairness_expression(spec)?;
    add_abs_penalty(&mut model, &terms, constant, h.rho.to_f64().unwrap());
    for i in 0..n {
        model.add_obj(format!("s_{i}"), 1.0 / n_f);
        model.add_obj(format!("z_{i}"), -t / n_f);
    }
    let lambda = h.lambda.to_f64().unwrap();
    for d in 0..data.n_features() {
        if lambda != 0.0 {
            model.qobj.push(QuadTerm { name1: format!("w_{d}"), name2: format!("w_{d}"), coef: lambda });
        }
    }
    model.validate()?;
    Ok(model)
}

/// Exact model of the multiclass pairwise-margin objective with the group
/// measure on the diagonal indicators. The objective carries the constant
/// `-t (K - 1)` from expanding the excluded-pair weights.
pub fn build_gmsvmf<T: Scalar>(
    data: &Dataset<T>,
    h: &HyperParams<T>,
    spec: &FairnessSpec,
    mu_override: Option<f64>,
) -> Result<MicpModel> {
    h.validate()?;
    if spec.kind != FairnessKind::Omr {
        return Err(Error::InvalidInput("multiclass builder supports the overall measure".into()));
    }
    if spec.n_points() != data.len() {
        return Err(Error::DimensionMismatch("spec built for a different dataset".into()));
    }
    let k = data.class_count();
    let n = data.len();
    let n_f = n as f64;
    let t = h.t.to_f64().unwrap();
    let m_u = match mu_override {
        Some(m) => m,
        None => {
            // Margin differences involve two classifiers; double the
            // single-classifier constant to stay a valid bound.
            2.0 * big_m(h, data)?.to_f64().unwrap()
        }
    };
    let mut model = MicpModel::new();
    for j in 1..=k {
        for d in 0..data.n_features() {
            model.add_var(format!("w_{j}_{d}"), VarKind::Continuous, None, None);
        }
    }
    for j in 1..=k {
        model.add_var(format!("b_{j}"), VarKind::Continuous, None, None);
    }
    let pair_name = |prefix: &str, i: usize, j: usize| format!("{prefix}_{i}_{j}");
    for i in 0..n {
        let yi = data.labels()[i] as usize;
        for j in 1..=k {
            if j != yi {
                model.add_var(pair_name("u", i, j), VarKind::Continuous, Some(0.0), None);
            }
        }
    }
    for i in 0..n {
        for j in 1..=k {
            model.add_var(pair_name("z", i, j), VarKind::Binary, None, None);
        }
    }
    for i in 0..n {
        let yi = data.labels()[i] as usize;
        for j in 1..=k {
            if j != yi {
                model.add_var(pair_name("s", i, j), VarKind::Continuous, Some(0.0), None);
            }
        }
    }
    // Pairwise margins.
    for i in 0..n {
        let yi = data.labels()[i] as usize;
        for j in 1..=k {
            if j == yi {
                continue;
            }
            let mut coeffs: Vec<(String, f64)> = Vec::new();
            for (d, &x) in data.row(i).iter().enumerate() {
                let xv = x.to_f64().unwrap();
                coeffs.push((format!("w_{yi}_{d}"), xv));
                coeffs.push((format!("w_{j}_{d}"), -xv));
            }
            coeffs.push((format!("b_{yi}"), 1.0));
            coeffs.push((format!("b_{j}"), -1.0));
            coeffs.push((pair_name("u", i, j), 1.0));
            model.add_row(coeffs, Sense::Ge, 1.0);
        }
    }
    // One label per point.
    for i in 0..n {
        let coeffs = (1..=k).map(|j| (pair_name("z", i, j), 1.0)).collect();
        model.add_row(coeffs, Sense::Eq, 1.0);
    }
    for i in 0..n {
        let yi = data.labels()[i] as usize;
        for j in 1..=k {
            if j != yi {
                add_mccormick(&mut model, &pair_name("s", i, j), &pair_name("u", i, j), &pair_name("z", i, j), m_u);
            }
        }
    }
    // Group penalty on the diagonal indicators.
    let mut terms: Vec<(String, f64)> = Vec::new();
    for &i in &spec.d_plus {
        let yi = data.labels()[i] as usize;
        terms.push((pair_name("z", i, yi), 1.0 / spec.d_plus.len() as f64));
    }
    for &i in &spec.d_minus {
        let yi = data.labels()[i] as usize;
        terms.push((pair_name("z", i, yi), -1.0 / spec.d_minus.len() as f64));
    }
    add_abs_penalty(&mut model, &terms, 0.0, h.rho.to_f64().unwrap());
    for i in 0..n {
        let yi = data.labels()[i] as usize;
        for j in 1..=k {
            if j == yi {
                continue;
            }
            model.add_obj(pair_name("u", i, j), 1.0 / n_f);
            model.add_obj(pair_name("s", i, j), -1.0 / n_f);
            model.add_obj(pair_name("z", i, j), t / n_f);
        }
    }
    model.obj.constant = -t * (k as f64 - 1.0);
    let lambda = h.lambda.to_f64().unwrap();
    if lambda != 0.0 {
        for j in 1..=k {
            for d in 0..data.n_features() {
                model.qobj.push(QuadTerm {
                    name1: format!("w_{j}_{d}"),
                    name2: format!("w_{j}_{d}"),
                    coef: lambda,
                });
            }
        }
    }
    model.validate()?;
    Ok(model)
}

/// Exact model of the class-weighted hinge objective penalizing one minus
/// the F1 score through a rotated-cone linearization of the ratio.
pub fn build_gsvm_f1<T: Scalar>(
    data: &Dataset<T>,
    h: &HyperParams<T>,
    spec: &FairnessSpec,
    mu_override: Option<f64>,
) -> Result<MicpModel> {
    h.validate()?;
    if spec.kind != FairnessKind::F1Complement {
        return Err(Error::InvalidInput("this builder handles the F1 objective".into()));
    }
    if !data.is_binary() {
        return Err(Error::InvalidInput("binary labels required".into()));
    }
    if spec.n_points() != data.len() {
        return Err(Error::DimensionMismatch("spec built for a different dataset".into()));
    }
    let m_u = match mu_override {
        Some(m) => m,
        None => big_m(h, data)?.to_f64().unwrap(),
    };
    let n = data.len();
    let np = spec.n_plus.len() as f64;
    let nm = spec.n_minus.len() as f64;
    let t = h.t.to_f64().unwrap();
    let mut model = MicpModel::new();
    for d in 0..data.n_features() {
        model.add_var(format!("w_{d}"), VarKind::Continuous, None, None);
    }
    model.add_var("b", VarKind::Continuous, None, None);
    for i in 0..n {
        model.add_var(format!("u_{i}"), VarKind::Continuous, Some(0.0), None);
    }
    for i in 0..n {
        model.add_var(format!("z_{i}"), VarKind::Binary, None, None);
    }
    for i in 0..n {
        model.add_var(format!("s_{i}"), VarKind::Continuous, Some(0.0), None);
    }
    // Unselected indicators entering the cone row.
    for i in 0..n {
        model.add_var(format!("d_{i}"), VarKind::Continuous, Some(0.0), Some(1.0));
    }
    // Denominator of the F1 complement: N + selected positives - selected
    // negatives, which ranges over [N - N-, N + N+].
    model.add_var(
        "A",
        VarKind::Continuous,
        Some(n as f64 - nm),
        Some(n as f64 + np),
    );
    model.add_var("eta", VarKind::Continuous, Some(0.0), None);

    add_hinge_rows(&mut model, data);
    for i in 0..n {
        add_mccormick(&mut model, &format!("s_{i}"), &format!("u_{i}"), &format!("z_{i}"), m_u);
    }
    for i in 0..n {
        model.add_row(vec![(format!("d_{i}"), 1.0), (format!("z_{i}"), 1.0)], Sense::Eq, 1.0);
    }
    let mut a_row: Vec<(String, f64)> = vec![("A".into(), 1.0)];
    for &i in &spec.n_plus {
        a_row.push((format!("z_{i}"), -1.0));
    }
    for &i in &spec.n_minus {
        a_row.push((format!("z_{i}"), 1.0));
    }
    model.add_row(a_row, Sense::Eq, n as f64);
    model.rcones.push(RotatedCone {
        t: "eta".into(),
        u: "A".into(),
        x: (0..n).map(|i| format!("d_{i}")).collect(),
    });
    model.add_obj("eta", h.rho.to_f64().unwrap());
    for &i in &spec.n_plus {
        model.add_obj(format!("s_{i}"), 1.0 / np);
        model.add_obj(format!("z_{i}"), -t / np);
    }
    for &i in &spec.n_minus {
        model.add_obj(format!("s_{i}"), 1.0 / nm);
        model.add_obj(format!("z_{i}"), -t / nm);
    }
    let lambda = h.lambda.to_f64().unwrap();
    if lambda != 0.0 {
        for d in 0..data.n_features() {
            model.qobj.push(QuadTerm { name1: format!("w_{d}"), name2: format!("w_{d}"), coef: lambda });
        }
    }
    model.validate()?;
    Ok(model)
}

fn abs_expression_value(spec: &FairnessSpec, z: &[bool]) -> Result<f64> {
    let (terms, constant) = fairness_expression(spec)?;
    let mut value = constant;
    for (name, c) in terms {
        let idx: usize = name["z_".len()..].parse().expect("z variable name");
        if z[idx] {
            value += c;
        }
    }
    Ok(value.abs())
}

/// Full variable assignment of the binary hinge model at a classifier and
/// selection: tight margins, products for the linearized terms, and the
/// absolute-value auxiliary.
pub fn gsvmf_assignment<T: Scalar>(
    model: &crate::model::LinearModel<T>,
    z: &[bool],
    data: &Dataset<T>,
    spec: &FairnessSpec,
) -> Result<BTreeMap<String, f64>> {
    let scores = crate::model::margins(model, data)?;
    let mut assign = BTreeMap::new();
    for (d, w) in model.w.iter().enumerate() {
        assign.insert(format!("w_{d}"), w.to_f64().unwrap());
    }
    assign.insert("b".into(), model.b.to_f64().unwrap());
    for i in 0..data.len() {
        let u = scores.values[i].to_f64().unwrap();
        let zi = if z[i] { 1.0 } else { 0.0 };
        assign.insert(format!("u_{i}"), u);
        assign.insert(format!("z_{i}"), zi);
        assign.insert(format!("s_{i}"), zi * u);
    }
    assign.insert("fair".into(), abs_expression_value(spec, z)?);
    Ok(assign)
}

/// Assignment of the F1 model: the cone variables take their tight values
/// `d = 1 - z`, `A` the denominator, `eta` the ratio itself.
pub fn gsvm_f1_assignment<T: Scalar>(
    model: &crate::model::LinearModel<T>,
    z: &[bool],
    data: &Dataset<T>,
    spec: &FairnessSpec,
) -> Result<BTreeMap<String, f64>> {
    let scores = crate::model::margins(model, data)?;
    let mut assign = BTreeMap::new();
    for (d, w) in model.w.iter().enumerate() {
        assign.insert(format!("w_{d}"), w.to_f64().unwrap());
    }
    assign.insert("b".into(), model.b.to_f64().unwrap());
    let mut selected_pos = 0usize;
    let mut selected_neg = 0usize;
    for i in 0..data.len() {
        let u = scores.values[i].to_f64().unwrap();
        let zi = if z[i] { 1.0 } else { 0.0 };
        assign.insert(format!("u_{i}"), u);
        assign.insert(format!("z_{i}"), zi);
        assign.insert(format!("s_{i}"), zi * u);
        assign.insert(format!("d_{i}"), 1.0 - zi);
    }
    for &i in &spec.n_plus {
        if z[i] {
            selected_pos += 1;
        }
    }
    for &i in &spec.n_minus {
        if z[i] {
            selected_neg += 1;
        }
    }
    let a = data.len() as f64 + selected_pos as f64 - selected_neg as f64;
    let unselected = z.iter().filter(|&&b| !b).count() as f64;
    assign.insert("A".into(), a);
    assign.insert("eta".into(), unselected / a);
    Ok(assign)
}

/// Assignment of the multiclass model at a classifier and one-hot
/// selection.
pub fn gmsvmf_assignment<T: Scalar>(
    model: &crate::model::MulticlassModel<T>,
    z: &crate::data::OneHotSelection,
    data: &Dataset<T>,
    spec: &FairnessSpec,
) -> Result<BTreeMap<String, f64>> {
    let scores = crate::model::multiclass_margins(model, data)?;
    let k = data.class_count();
    let mut assign = BTreeMap::new();
    for j in 1..=k {
        for (d, w) in model.w[j - 1].iter().enumerate() {
            assign.insert(format!("w_{j}_{d}"), w.to_f64().unwrap());
        }
        assign.insert(format!("b_{j}"), model.b[j - 1].to_f64().unwrap());
    }
    for i in 0..data.len() {
        let yi = data.labels()[i] as usize;
        for j in 1..=k {
            let zij = if z.indicator(i, j) { 1.0 } else { 0.0 };
            assign.insert(format!("z_{i}_{j}"), zij);
            if j != yi {
                let u = scores.get(i, j).to_f64().unwrap();
                assign.insert(format!("u_{i}_{j}"), u);
                assign.insert(format!("s_{i}_{j}"), zij * u);
            }
        }
    }
    let diag = z.diagonal(data.labels());
    let dp = spec.d_plus.len() as f64;
    let dm = spec.d_minus.len() as f64;
    let mut expr = 0.0;
    for &i in &spec.d_plus {
        if diag[i] {
            expr += 1.0 / dp;
        }
    }
    for &i in &spec.d_minus {
        if diag[i] {
            expr -= 1.0 / dm;
        }
    }
    assign.insert("fair".into(), expr.abs());
    Ok(assign)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset<f64> {
        let feats: Vec<f64> = (0..n * 2).map(|i| (i % 5) as f64 / 5.0).collect();
        let labels: Vec<i32> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let groups: Vec<i8> = (0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect();
        Dataset::binary(feats, 2, labels, groups).unwrap()
    }

    #[test]
    fn big_m_closed_form() {
        let data = Dataset::binary(vec![1.0, 0.0, 0.0, 1.0], 2, vec![1, -1], vec![1, -1]).unwrap();
        let h = HyperParams::new(1.0, 1.0, 0.0);
        assert_eq!(big_m(&h, &data).unwrap(), 4.0);
        let half = Dataset::binary(vec![0.5, 0.0, 0.0, 0.5], 2, vec![1, -1], vec![1, -1]).unwrap();
        let h = HyperParams::new(4.0, 1.0, 0.0);
        assert_eq!(big_m(&h, &half).unwrap(), 4.0);
        let h = HyperParams::new(1.0, 0.0, 0.0);
        assert!(big_m(&h, &data).is_err());
    }

    #[test]
    fn s_hat_examples_and_brute_force() {
        assert_eq!(s_hat(1, 1).unwrap(), Ratio::new(1u64, 1));
        assert_eq!(s_hat(4, 6).unwrap(), Ratio::new(1u64, 12));
        assert_eq!(s_hat(5, 5).unwrap(), Ratio::new(1u64, 5));
        assert!(s_hat(0, 3).is_err());
        for dp in 1u64..=12 {
            for dm in 1u64..=12 {
                let mut best: Option<Ratio<i64>> = None;
                for a in 0..=dp as i64 {
                    for b in 0..=dm as i64 {
                        let v = Ratio::new(a, dp as i64) - Ratio::new(b, dm as i64);
                        let v = if v < Ratio::new(0, 1) { -v } else { v };
                        if v > Ratio::new(0, 1) && best.map_or(true, |bst| v < bst) {
                            best = Some(v);
                        }
                    }
                }
                let got = s_hat(dp, dm).unwrap();
                let got = Ratio::new(*got.numer() as i64, *got.denom() as i64);
                assert_eq!(got, best.unwrap(), "D+ = {dp}, D- = {dm}");
            }
        }
    }

    #[test]
    fn gsvmf_variable_count() {
        let data = toy(3);
        let spec = FairnessSpec::build(FairnessKind::Omr, data.labels(), data.groups()).unwrap();
        let h = HyperParams::new(1.0, 0.5, 0.2);
        let model = build_gsvmf(&data, &h, &spec, None).unwrap();
        // w (n) + b + u, z, s (3 each) + fairness auxiliary.
        assert_eq!(model.vars.len(), 2 + 1 + 3 * 3 + 1);
        // rho = 0 still yields a valid model with the auxiliary present.
        let h0 = HyperParams::new(1.0, 0.5, 0.0);
        let m0 = build_gsvmf(&data, &h0, &spec, None).unwrap();
        assert_eq!(m0.vars.len(), model.vars.len());
        assert!(!m0.obj.coeffs.contains_key("fair"));
        m0.validate().unwrap();
    }

    #[test]
    fn json_round_trip_is_bit_identical() {
        let data = toy(4);
        let spec = FairnessSpec::build(FairnessKind::Dp, data.labels(), data.groups()).unwrap();
        let h = HyperParams::new(1.0, 0.25, 0.7);
        let model = build_gsvmf(&data, &h, &spec, None).unwrap();
        let text = model.to_json();
        let parsed = MicpModel::from_json(&text).unwrap();
        assert_eq!(parsed, model);
        assert_eq!(parsed.to_json(), text);
    }

    #[test]
    fn f1_builder_bounds_and_cone() {
        let data = toy(4);
        let spec = FairnessSpec::build(FairnessKind::F1Complement, data.labels(), data.groups()).unwrap();
        let h = HyperParams::new(1.0, 0.5, 0.3);
        let model = build_gsvm_f1(&data, &h, &spec, None).unwrap();
        let a = model.vars.iter().find(|v| v.name == "A").unwrap();
        // A ranges over [N - N-, N + N+].
        assert_eq!(a.lb, Some(4.0 - 2.0));
        assert_eq!(a.ub, Some(4.0 + 2.0));
        assert_eq!(model.rcones.len(), 1);
        assert_eq!(model.rcones[0].x.len(), 4);
        // Full selection satisfies the cone with eta = 0.
        let mut assign = BTreeMap::new();
        for d in 0..2 {
            assign.insert(format!("w_{d}"), 0.0);
        }
        assign.insert("b".into(), 0.0);
        for i in 0..4 {
            assign.insert(format!("u_{i}"), 1.0);
            assign.insert(format!("z_{i}"), 1.0);
            assign.insert(format!("s_{i}"), 1.0);
            assign.insert(format!("d_{i}"), 0.0);
        }
        assign.insert("A".into(), 4.0 + 2.0 - 2.0);
        assign.insert("eta".into(), 0.0);
        assert!(model.is_feasible(&assign, 1e-9).unwrap());
    }

    #[test]
    fn gmsvmf_one_hot_rows() {
        let data = Dataset::new(
            vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
            2,
            vec![1, 2, 3, 1],
            vec![1, -1, 1, -1],
            3,
        )
        .unwrap();
        let spec = FairnessSpec::build(FairnessKind::Omr, data.labels(), data.groups()).unwrap();
        let h = HyperParams::new(0.5, 0.5, 0.2);
        let model = build_gmsvmf(&data, &h, &spec, None).unwrap();
        let one_hot_rows: Vec<&LinRow> = model
            .linear
            .iter()
            .filter(|r| r.sense == Sense::Eq && r.rhs == 1.0)
            .collect();
        assert_eq!(one_hot_rows.len(), 4);
        for row in one_hot_rows {
            assert_eq!(row.coeffs.len(), 3);
            assert!(row.coeffs.values().all(|&c| c == 1.0));
        }
        // Variable count: w (K * n) + b (K) + u, s (N * (K-1)) + z (N * K) + fair.
        assert_eq!(model.vars.len(), 3 * 2 + 3 + 2 * (4 * 2) + 4 * 3 + 1);
        assert_eq!(model.obj.constant, -0.5 * 2.0);
    }

    #[test]
    fn lp_writer_smoke_and_cone_rejection() {
        let data = toy(3);
        let spec = FairnessSpec::build(FairnessKind::Omr, data.labels(), data.groups()).unwrap();
        let h = HyperParams::new(1.0, 0.5, 0.2);
        let model = build_gsvmf(&data, &h, &spec, None).unwrap();
        let lp = model.write_lp().unwrap();
        assert!(lp.contains("Minimize"));
        assert!(lp.contains("Binaries"));
        assert!(lp.contains("w_0 ^2"));
        assert!(lp.ends_with("End\n"));

        let spec_f1 = FairnessSpec::build(FairnessKind::F1Complement, data.labels(), data.groups()).unwrap();
        let cone_model = build_gsvm_f1(&data, &h, &spec_f1, None).unwrap();
        assert!(cone_model.write_lp().is_err());
    }
}
