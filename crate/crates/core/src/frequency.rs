//! Frequencies as exact ℚ-linear combinations of declared basis symbols.
//!
//! A frequency `λ = Σ c_j β_j` is stored as its rational coordinates over a
//! basis of symbols. The symbol `"1"` is the rational unit; every other
//! symbol carries a high-precision decimal approximation used only for
//! sign checks and simulation. Whether two frequencies are rationally
//! related is decided on the coordinates, never on the decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{domain, Error, Result};
use crate::lattice::{self, IntVec};
use crate::rational::{self, Rational};

/// Identifier of the rational unit symbol.
pub const UNIT: &str = "1";

/// Minimum number of significant digits for irrational symbol values.
pub const MIN_SIGNIFICANT_DIGITS: usize = 30;

const BUILTIN_DIGITS: u32 = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSymbol {
    pub id: String,
    /// Exact value of the decimal approximation.
    pub value: Rational,
    pub independence_declared: bool,
}

impl BasisSymbol {
    pub fn unit() -> Self {
        Self { id: UNIT.to_string(), value: Rational::one(), independence_declared: true }
    }

    /// A symbol whose value is given as a decimal literal with at least
    /// [`MIN_SIGNIFICANT_DIGITS`] significant digits.
    pub fn from_decimal(id: &str, decimal: &str, independence_declared: bool) -> Result<Self> {
        if id == UNIT {
            return domain("symbol id \"1\" is reserved for the rational unit");
        }
        if id.is_empty() {
            return domain("empty symbol id");
        }
        let d = rational::parse_decimal(decimal)?;
        if d.significant_digits < MIN_SIGNIFICANT_DIGITS {
            return domain(format!(
                "symbol {id:?} has {} significant digits, need at least {MIN_SIGNIFICANT_DIGITS}",
                d.significant_digits
            ));
        }
        if !d.value.is_positive() {
            return domain(format!("symbol {id:?} must have a positive value"));
        }
        Ok(Self { id: id.to_string(), value: d.value, independence_declared })
    }

    /// `√n` as symbol `"sqrt<n>"`, declared independent.
    pub fn sqrt(n: u64) -> Self {
        Self { id: format!("sqrt{n}"), value: rational::sqrt_decimal(n, BUILTIN_DIGITS), independence_declared: true }
    }

    /// The golden ratio `(1 + √5) / 2` as symbol `"phi"`.
    pub fn golden_ratio() -> Self {
        let v = (Rational::one() + rational::sqrt_decimal(5, BUILTIN_DIGITS)) / rational::int(2);
        Self { id: "phi".to_string(), value: v, independence_declared: true }
    }
}

/// Rational coordinates over basis symbol ids; zero coordinates are never
/// stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct FrequencyVector {
    coords: BTreeMap<String, Rational>,
}

impl FrequencyVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(r: Rational) -> Self {
        Self::from_coords([(UNIT.to_string(), r)])
    }

    pub fn symbol(id: &str, coeff: Rational) -> Self {
        Self::from_coords([(id.to_string(), coeff)])
    }

    pub fn from_coords<I: IntoIterator<Item = (String, Rational)>>(iter: I) -> Self {
        let mut v = Self::zero();
        for (id, c) in iter {
            v.add_term(&id, &c);
        }
        v
    }

    fn add_term(&mut self, id: &str, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coords.entry(id.to_string()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coords.remove(id);
        }
    }

    pub fn coords(&self) -> &BTreeMap<String, Rational> {
        &self.coords
    }

    pub fn coeff(&self, id: &str) -> Rational {
        self.coords.get(id).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// `Some(r)` when the vector is a pure rational (only the unit symbol).
    pub fn as_rational(&self) -> Option<Rational> {
        match self.coords.len() {
            0 => Some(Rational::zero()),
            1 => self.coords.get(UNIT).cloned(),
            _ => None,
        }
    }

    pub fn scaled(&self, s: &Rational) -> Self {
        Self::from_coords(self.coords.iter().map(|(k, c)| (k.clone(), c * s)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut v = self.clone();
        for (k, c) in &other.coords {
            v.add_term(k, c);
        }
        v
    }

    /// `Some(q)` with `self = q · other` when the two are proportional.
    pub fn ratio_to(&self, other: &Self) -> Option<Rational> {
        let (k, c) = other.coords.iter().next()?;
        let q = self.coeff(k) / c;
        (self.coords.keys().eq(other.coords.keys()) && other.coords.iter().all(|(k, c)| self.coeff(k) == c * &q))
            .then_some(q)
    }

    /// Exact value of the represented real against the symbols' decimal
    /// approximations.
    pub fn value(&self, basis: &[BasisSymbol]) -> Rational {
        self.coords
            .iter()
            .map(|(id, c)| {
                let b = basis.iter().find(|b| &b.id == id).map_or_else(Rational::zero, |b| b.value.clone());
                c * b
            })
            .sum()
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        for (i, (id, c)) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if id == UNIT {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{id}")?;
            } else {
                write!(f, "{c}*{id}")?;
            }
        }
        Ok(())
    }
}

/// How the integer multipliers of an arithmetic family are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum ArithmeticRule {
    /// `n_k = k`
    Index,
    /// Explicit multipliers `n_1, n_2, …`; the family has only this many terms.
    List(Vec<BigInt>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `λ_k = λ0 · n_k`
    Arithmetic { lambda0: Rational, rule: ArithmeticRule },
    /// `λ_k = 1 / k!`
    Factorial,
    /// `λ_k = p_{2k} / p_{2k−1}`
    PrimeRatio,
    /// The prefix is the whole (finite) system.
    Explicit,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Arithmetic { .. } => "arithmetic",
            Family::Factorial => "factorial",
            Family::PrimeRatio => "prime_ratio",
            Family::Explicit => "explicit",
        }
    }

    /// Families whose oscillator periods are known to be unbounded, so no
    /// trajectory is periodic even though every finite projection is.
    pub fn has_unbounded_periods(&self) -> bool {
        matches!(self, Family::Factorial | Family::PrimeRatio)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySystem {
    basis: Vec<BasisSymbol>,
    prefix: Vec<FrequencyVector>,
    family: Option<Family>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationLattice {
    pub ambient_dim: usize,
    /// Primitive integer relations, in echelon order of their last nonzero
    /// entry, each with first nonzero entry positive.
    pub basis_vectors: Vec<IntVec>,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrongMode {
    /// Each element of the inspected set lies in the ℚ-span of the others.
    Literal,
    /// Relation rank `N − 1`, i.e. all pairwise ratios rational.
    #[default]
    RankCharacterization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommonBase {
    /// `λ0`, a positive frequency with `λ_k = λ0 · n_k`.
    pub lambda0: FrequencyVector,
    pub multipliers: Vec<BigInt>,
    /// True when the answer only certifies the inspected prefix.
    pub prefix_only: bool,
}

/// A joint period `T = 2π / λ0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Period {
    pub lambda0: FrequencyVector,
}

impl Period {
    /// `T / 2π` when it is rational.
    pub fn over_two_pi(&self) -> Option<Rational> {
        self.lambda0.as_rational().map(|r| r.recip())
    }

    pub fn over_two_pi_f64(&self, basis: &[BasisSymbol]) -> f64 {
        1.0 / rational::to_f64(&self.lambda0.value(basis))
    }

    /// `other / self` when rational.
    pub fn ratio_to(&self, other: &Period) -> Option<Rational> {
        self.lambda0.ratio_to(&other.lambda0)
    }

    pub fn display(&self) -> String {
        match self.over_two_pi() {
            Some(r) => rational::format_rational(&r),
            None => format!("1/({})", self.lambda0),
        }
    }
}

impl FrequencySystem {
    pub fn new(basis: Vec<BasisSymbol>, prefix: Vec<FrequencyVector>, family: Option<Family>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut full = vec![BasisSymbol::unit()];
        for b in basis {
            if !seen.insert(b.id.clone()) {
                return domain(format!("duplicate basis symbol {:?}", b.id));
            }
            if b.id == UNIT {
                if !b.value.is_one() {
                    return domain("basis symbol \"1\" must have value 1");
                }
                continue;
            }
            full.push(b);
        }
        if prefix.is_empty() {
            return domain("frequency prefix must contain at least one entry");
        }
        let sys = Self { basis: full, prefix, family };
        for (k, v) in sys.prefix.iter().enumerate() {
            if let Some(id) = v.coords.keys().find(|id| !sys.basis.iter().any(|b| &b.id == *id)) {
                return domain(format!("frequency {} uses undeclared symbol {id:?}", k + 1));
            }
            if !v.value(&sys.basis).is_positive() {
                return domain(format!("frequency {} = {v} is not positive", k + 1));
            }
        }
        if let Some(f) = &sys.family {
            if *f != Family::Explicit {
                let expected = family_prefix(f, sys.prefix.len())?;
                if let Some(k) = (0..expected.len()).find(|&k| expected[k] != sys.prefix[k]) {
                    return domain(format!(
                        "prefix entry {} = {} contradicts the {} family (expected {})",
                        k + 1,
                        sys.prefix[k],
                        f.name(),
                        expected[k]
                    ));
                }
            }
        }
        Ok(sys)
    }

    /// Rational frequencies with no family tag.
    pub fn from_rationals(values: &[Rational]) -> Result<Self> {
        Self::new(vec![], values.iter().cloned().map(FrequencyVector::rational).collect(), None)
    }

    pub fn basis(&self) -> &[BasisSymbol] {
        &self.basis
    }

    pub fn prefix(&self) -> &[FrequencyVector] {
        &self.prefix
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    /// High-precision value of `λ_k` (0-based index).
    pub fn value(&self, k: usize) -> Rational {
        self.prefix[k].value(&self.basis)
    }

    /// True when every symbol used by the first `upto` frequencies is the
    /// unit or declared independent.
    pub fn independence_declared(&self, upto: usize) -> bool {
        self.prefix[..upto.min(self.len())]
            .iter()
            .flat_map(|v| v.coords.keys())
            .all(|id| self.basis.iter().any(|b| &b.id == id && b.independence_declared))
    }

    /// `(λ, n) = Σ n_k λ_k` for sparse 1-based indices.
    pub fn pairing(&self, n: &[(usize, i64)]) -> Result<FrequencyVector> {
        let mut acc = FrequencyVector::zero();
        for &(k, nk) in n {
            if k == 0 || k > self.len() {
                return Err(Error::PrefixTooShort { available: self.len(), required: k });
            }
            acc = acc.plus(&self.prefix[k - 1].scaled(&rational::int(nk)));
        }
        Ok(acc)
    }

    /// The subsystem made of the given 0-based indices, untagged.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let prefix = indices.iter().map(|&i| self.prefix[i].clone()).collect();
        Self::new(self.basis.clone(), prefix, None)
    }

    fn check_upto(&self, upto: usize, min: usize) -> Result<()> {
        if upto < min {
            return domain(format!("upto = {upto} must be at least {min}"));
        }
        if upto > self.len() {
            return Err(Error::PrefixTooShort { available: self.len(), required: upto });
        }
        Ok(())
    }

    /// Coefficient rows (one per symbol in use) over the first `upto`
    /// frequencies.
    fn coefficient_rows(&self, upto: usize) -> Vec<Vec<Rational>> {
        let symbols: BTreeSet<&String> = self.prefix[..upto].iter().flat_map(|v| v.coords.keys()).collect();
        symbols
            .into_iter()
            .map(|id| self.prefix[..upto].iter().map(|v| v.coeff(id)).collect())
            .collect()
    }

    /// ℚ-rank of `{λ_1, …, λ_upto}`.
    pub fn rank_q(&self, upto: usize) -> Result<usize> {
        self.check_upto(upto, 1)?;
        Ok(lattice::rank_q(&self.coefficient_rows(upto)))
    }

    /// The lattice of integer relations `Σ n_k λ_k = 0` among the first
    /// `upto` frequencies.
    pub fn relation_lattice(&self, upto: usize) -> Result<RelationLattice> {
        self.check_upto(upto, 1)?;
        let int_rows: Vec<IntVec> = self
            .coefficient_rows(upto)
            .into_iter()
            .map(|row| {
                let den = row.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
                row.iter().map(|c| (c * Rational::from_integer(den.clone())).to_integer()).collect()
            })
            .collect();
        let kernel = lattice::integer_kernel(&int_rows, upto);
        let mut basis_vectors = echelon_by_last_support(kernel, upto);
        for v in &mut basis_vectors {
            lattice::normalize_primitive(v);
        }
        debug_assert!(basis_vectors.iter().all(|v| self.annihilates(v)));
        let rank = basis_vectors.len();
        Ok(RelationLattice { ambient_dim: upto, basis_vectors, rank })
    }

    /// Whether `Σ n_k λ_k = 0` holds exactly.
    pub fn annihilates(&self, n: &[BigInt]) -> bool {
        if n.len() > self.len() {
            return false;
        }
        let mut acc = FrequencyVector::zero();
        for (v, nk) in self.prefix.iter().zip(n) {
            acc = acc.plus(&v.scaled(&Rational::from_integer(nk.clone())));
        }
        acc.is_zero()
    }

    pub fn is_rationally_commensurable(&self, upto: usize) -> Result<bool> {
        self.check_upto(upto, 2)?;
        Ok(self.rank_q(upto)? < upto)
    }

    pub fn is_strongly_commensurable(&self, upto: usize, mode: StrongMode) -> Result<bool> {
        self.check_upto(upto, 2)?;
        let rows = self.coefficient_rows(upto);
        let full = lattice::rank_q(&rows);
        Ok(match mode {
            StrongMode::RankCharacterization => full == 1,
            StrongMode::Literal => (0..upto).all(|k| {
                let without: Vec<Vec<Rational>> = rows
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, c)| c.clone()).collect())
                    .collect();
                lattice::rank_q(&without) == full
            }),
        })
    }

    /// `λ_k = λ0 · n_k` on the first `upto` frequencies, when such a base
    /// exists.
    pub fn common_base(&self, upto: usize) -> Result<Option<CommonBase>> {
        self.check_upto(upto, 1)?;
        let first = &self.prefix[0];
        let Some(ratios) = self.prefix[..upto].iter().map(|v| v.ratio_to(first)).collect::<Option<Vec<_>>>() else {
            return Ok(None);
        };
        let g = rational::rational_gcd(&ratios)?;
        let multipliers = ratios.iter().map(|r| (r / &g).to_integer()).collect();
        let prefix_only = match &self.family {
            Some(Family::Arithmetic { .. }) => false,
            Some(Family::Explicit) => upto < self.len(),
            _ => true,
        };
        Ok(Some(CommonBase { lambda0: first.scaled(&g), multipliers, prefix_only }))
    }

    /// Minimal joint period of the first `upto` oscillators.
    pub fn prefix_period(&self, upto: usize) -> Result<Option<Period>> {
        Ok(self.common_base(upto)?.map(|cb| Period { lambda0: cb.lambda0 }))
    }
}

/// Canonical relation basis: echelon on the last nonzero coordinate with
/// positive pivots, entries at earlier pivots reduced into `[0, pivot)`.
fn echelon_by_last_support(mut rows: Vec<IntVec>, n: usize) -> Vec<IntVec> {
    let mut top = 0;
    for col in (0..n).rev() {
        loop {
            let Some(p) = (top..rows.len())
                .filter(|&i| !rows[i][col].is_zero())
                .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()))
            else {
                break;
            };
            rows.swap(top, p);
            let mut done = true;
            for i in top + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[top][col]);
                let pivot = rows[top].clone();
                for (a, b) in rows[i].iter_mut().zip(&pivot) {
                    *a -= &q * b;
                }
                done &= rows[i][col].is_zero();
            }
            if done {
                top += 1;
                break;
            }
        }
    }
    rows.truncate(top);
    rows.reverse();
    let pivot_col = |v: &IntVec| v.iter().rposition(|x| !x.is_zero()).unwrap_or(0);
    for v in &mut rows {
        if v[pivot_col(v)].is_negative() {
            v.iter_mut().for_each(|x| *x = -&*x);
        }
    }
    for j in 1..rows.len() {
        for i in (0..j).rev() {
            let pc = pivot_col(&rows[i]);
            let q = rows[j][pc].div_floor(&rows[i][pc]);
            if q.is_zero() {
                continue;
            }
            let pivot = rows[i].clone();
            for (a, b) in rows[j].iter_mut().zip(&pivot) {
                *a -= &q * b;
            }
        }
    }
    rows
}

fn family_prefix(family: &Family, n: usize) -> Result<Vec<FrequencyVector>> {
    if n == 0 {
        return domain("family length must be at least 1");
    }
    let values: Vec<Rational> = match family {
        Family::Factorial => {
            let mut fact = BigInt::one();
            (1..=n)
                .map(|k| {
                    fact *= BigInt::from(k);
                    Rational::new(BigInt::one(), fact.clone())
                })
                .collect()
        }
        Family::PrimeRatio => {
            let p = rational::primes(2 * n);
            (1..=n).map(|k| rational::ratio(p[2 * k - 1] as i64, p[2 * k - 2] as i64)).collect()
        }
        Family::Arithmetic { lambda0, rule } => {
            if !lambda0.is_positive() {
                return domain("arithmetic family needs lambda0 > 0");
            }
            let ns: Vec<BigInt> = match rule {
                ArithmeticRule::Index => (1..=n).map(BigInt::from).collect(),
                ArithmeticRule::List(list) => {
                    if list.len() < n {
                        return domain(format!("arithmetic family lists only {} multipliers, {n} requested", list.len()));
                    }
                    list[..n].to_vec()
                }
            };
            if let Some(bad) = ns.iter().find(|x| !x.is_positive()) {
                return domain(format!("arithmetic multipliers must be natural numbers, got {bad}"));
            }
            ns.into_iter().map(|x| lambda0 * Rational::from_integer(x)).collect()
        }
        Family::Explicit => return domain("the explicit family has no generator"),
    };
    Ok(values.into_iter().map(FrequencyVector::rational).collect())
}

/// Materializes the first `n` frequencies of a generative family.
pub fn family_generate(family: &Family, n: usize) -> Result<FrequencySystem> {
    let prefix = family_prefix(family, n)?;
    FrequencySystem::new(vec![], prefix, Some(family.clone()))
}
