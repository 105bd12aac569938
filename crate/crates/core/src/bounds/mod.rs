//! Closed-form bound evaluators and small brute-force oracles that witness
//! them. Logarithms are base 2. Asymptotic forms are shape evaluators: they
//! take an explicit constant multiplier.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

mod oracles;

pub use oracles::{
    binomial_tail, collision_tail_estimate, counting_check, packing_oracle, packing_witness, CountingCheck, Packing,
    PackingWitness, TailEstimate,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundKind {
    /// `4^d`: size of an l1 packing in `d` dimensions.
    Volume,
    /// `s log(m/(sk)) / (c log(n/k))`: at least 1 when the tradeoff holds
    /// with constant `c`.
    Tradeoff,
    /// `c k log(n/k) / log(k/l)`.
    GeneralLower,
    /// `c k (1 + log_b(n/k))`.
    BlockLower,
    /// `c k log(n/k) / log log(n/k)`.
    TreeLower,
    /// `min{size (ek/t)^t, (en/t)^t}`.
    Counting,
    /// `(delta eps m / (d t))^(-eps d t)`.
    ConcentrationTail,
    /// `(e^tau / (1+tau)^(1+tau))^mu`.
    Chernoff,
    /// `c log(n/l) / (eps log(k/l))`.
    PlanD,
    /// `c k (1 + log_b(n/k)) / eps^2`.
    BlockUpper,
    /// `c (k/eps^2) log(n/k) / log log(n/k)`.
    TreeUpper,
    /// `c (k/eps^2) log(n/l) / log(k/l)`.
    ModelUpper,
}

impl BoundKind {
    pub const ALL: [BoundKind; 12] = [
        BoundKind::Volume,
        BoundKind::Tradeoff,
        BoundKind::GeneralLower,
        BoundKind::BlockLower,
        BoundKind::TreeLower,
        BoundKind::Counting,
        BoundKind::ConcentrationTail,
        BoundKind::Chernoff,
        BoundKind::PlanD,
        BoundKind::BlockUpper,
        BoundKind::TreeUpper,
        BoundKind::ModelUpper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Volume => "volume",
            BoundKind::Tradeoff => "tradeoff",
            BoundKind::GeneralLower => "general-lower",
            BoundKind::BlockLower => "block-lower",
            BoundKind::TreeLower => "tree-lower",
            BoundKind::Counting => "counting",
            BoundKind::ConcentrationTail => "concentration-tail",
            BoundKind::Chernoff => "chernoff",
            BoundKind::PlanD => "plan-d",
            BoundKind::BlockUpper => "block-upper",
            BoundKind::TreeUpper => "tree-upper",
            BoundKind::ModelUpper => "model-upper",
        }
    }

    /// Parameter names the kind reads.
    pub fn params(self) -> &'static [&'static str] {
        match self {
            BoundKind::Volume => &["d"],
            BoundKind::Tradeoff => &["s", "m", "n", "k"],
            BoundKind::GeneralLower => &["n", "k", "l"],
            BoundKind::BlockLower => &["n", "k", "b"],
            BoundKind::TreeLower => &["n", "k"],
            BoundKind::Counting => &["n", "k", "t", "size"],
            BoundKind::ConcentrationTail => &["delta", "eps", "m", "d", "t"],
            BoundKind::Chernoff => &["mu", "tau"],
            BoundKind::PlanD => &["n", "k", "l", "eps"],
            BoundKind::BlockUpper => &["n", "k", "b", "eps"],
            BoundKind::TreeUpper => &["n", "k", "eps"],
            BoundKind::ModelUpper => &["n", "k", "l", "eps"],
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown bound kind {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundQuery {
    pub kind: BoundKind,
    pub params: BTreeMap<String, f64>,
    /// Multiplier for asymptotic forms.
    pub constant: f64,
}

impl BoundQuery {
    pub fn new(kind: BoundKind, params: &[(&str, f64)]) -> Self {
        BoundQuery {
            kind,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            constant: 1.0,
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = c;
        self
    }

    fn get(&self, name: &str) -> Result<f64> {
        let v = *self
            .params
            .get(name)
            .ok_or_else(|| Error::input(format!("{} needs parameter {name}", self.kind)))?;
        if !v.is_finite() {
            return Err(Error::input(format!("parameter {name} must be finite")));
        }
        Ok(v)
    }

    /// `key=value;...` in parameter order, as printed by the CLI.
    pub fn params_text(&self) -> String {
        let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        parts.join(";")
    }
}

fn positive(kind: BoundKind, name: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::input(format!("{kind}: {name} must be positive, got {v}")))
    }
}

/// `log2(x)`, requiring `x > 1` so the value is positive.
fn log_gt1(kind: BoundKind, what: &str, x: f64) -> Result<f64> {
    if x > 1.0 {
        Ok(x.log2())
    } else {
        Err(Error::input(format!("{kind}: log({what}) needs {what} > 1, got {x}")))
    }
}

/// Evaluates the formula for `q.kind`; see [`BoundKind`].
pub fn eval_bound(q: &BoundQuery) -> Result<f64> {
    let kind = q.kind;
    let c = positive(kind, "constant", q.constant)?;
    let eps_in = |q: &BoundQuery| -> Result<f64> {
        let e = q.get("eps")?;
        if e > 0.0 && e < 1.0 {
            Ok(e)
        } else {
            Err(Error::input(format!("{kind}: eps must lie in (0, 1), got {e}")))
        }
    };
    match kind {
        BoundKind::Volume => {
            let d = q.get("d")?;
            if d < 0.0 {
                return Err(Error::input(format!("volume: d must be nonnegative, got {d}")));
            }
            Ok(4f64.powf(d))
        }
        BoundKind::Tradeoff => {
            let (s, m, n, k) = (q.get("s")?, q.get("m")?, q.get("n")?, q.get("k")?);
            let s = positive(kind, "s", s)?;
            let k = positive(kind, "k", k)?;
            let lhs = s * log_gt1(kind, "m/(s k)", m / (s * k))?;
            let rhs = log_gt1(kind, "n/k", n / k)?;
            Ok(lhs / (c * rhs))
        }
        BoundKind::GeneralLower => {
            let (n, k, l) = (q.get("n")?, q.get("k")?, q.get("l")?);
            let k = positive(kind, "k", k)?;
            let l = positive(kind, "l", l)?;
            Ok(c * k * log_gt1(kind, "n/k", n / k)? / log_gt1(kind, "k/l", k / l)?)
        }
        BoundKind::BlockLower => {
            let (n, k, b) = (q.get("n")?, q.get("k")?, q.get("b")?);
            if b < 2.0 || k < 2.0 * b {
                return Err(Error::input(format!("block-lower: needs b >= 2 and k >= 2b, got k={k}, b={b}")));
            }
            if n < k {
                return Err(Error::input(format!("block-lower: needs n >= k, got n={n}, k={k}")));
            }
            Ok(c * k * (1.0 + (n / k).log2() / b.log2()))
        }
        BoundKind::TreeLower => {
            let (n, k) = (q.get("n")?, q.get("k")?);
            let k = positive(kind, "k", k)?;
            let r = log_gt1(kind, "n/k", n / k)?;
            Ok(c * k * r / log_gt1(kind, "log(n/k)", r)?)
        }
        BoundKind::Counting => {
            let (n, k, t, size) = (q.get("n")?, q.get("k")?, q.get("t")?, q.get("size")?);
            if !(t >= 1.0 && t <= k && k <= n) {
                return Err(Error::input(format!("counting: needs 1 <= t <= k <= n, got t={t}, k={k}, n={n}")));
            }
            let e = std::f64::consts::E;
            Ok((size * (e * k / t).powf(t)).min((e * n / t).powf(t)))
        }
        BoundKind::ConcentrationTail => {
            let delta = positive(kind, "delta", q.get("delta")?)?;
            let eps = eps_in(q)?;
            let m = positive(kind, "m", q.get("m")?)?;
            let d = positive(kind, "d", q.get("d")?)?;
            let t = positive(kind, "t", q.get("t")?)?;
            Ok((delta * eps * m / (d * t)).powf(-eps * d * t))
        }
        BoundKind::Chernoff => {
            let mu = q.get("mu")?;
            if mu < 0.0 {
                return Err(Error::input(format!("chernoff: mu must be nonnegative, got {mu}")));
            }
            let tau = positive(kind, "tau", q.get("tau")?)?;
            // computed in logs to stay finite for large tau
            Ok((mu * (tau - (1.0 + tau) * (1.0 + tau).ln())).exp())
        }
        BoundKind::PlanD => {
            let (n, k, l) = (q.get("n")?, q.get("k")?, q.get("l")?);
            let eps = eps_in(q)?;
            let l = positive(kind, "l", l)?;
            Ok(c * log_gt1(kind, "n/l", n / l)? / (eps * log_gt1(kind, "k/l", k / l)?))
        }
        BoundKind::BlockUpper => {
            let (n, k, b) = (q.get("n")?, q.get("k")?, q.get("b")?);
            let eps = eps_in(q)?;
            let k = positive(kind, "k", k)?;
            if b < 2.0 {
                return Err(Error::input(format!("block-upper: log base b needs b >= 2, got {b}")));
            }
            if n < k {
                return Err(Error::input(format!("block-upper: needs n >= k, got n={n}, k={k}")));
            }
            Ok(c * k * (1.0 + (n / k).log2() / b.log2()) / (eps * eps))
        }
        BoundKind::TreeUpper => {
            let (n, k) = (q.get("n")?, q.get("k")?);
            let eps = eps_in(q)?;
            let k = positive(kind, "k", k)?;
            let r = log_gt1(kind, "n/k", n / k)?;
            Ok(c * k / (eps * eps) * r / log_gt1(kind, "log(n/k)", r)?)
        }
        BoundKind::ModelUpper => {
            let (n, k, l) = (q.get("n")?, q.get("k")?, q.get("l")?);
            let eps = eps_in(q)?;
            let k = positive(kind, "k", k)?;
            let l = positive(kind, "l", l)?;
            Ok(c * k / (eps * eps) * log_gt1(kind, "n/l", n / l)? / log_gt1(kind, "k/l", k / l)?)
        }
    }
}
