//! Integer lattice kernels: exact row echelon over ℚ, integer kernels via
//! unimodular reduction, and LLL basis reduction in exact arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

pub type IntVec = Vec<BigInt>;

/// Rank over ℚ of a rational matrix given as rows.
pub fn rank_q(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let n_cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..n_cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for i in rank + 1..m.len() {
            if m[i][col].is_zero() {
                continue;
            }
            let f = &m[i][col] / &pivot;
            for j in col..n_cols {
                let d = &f * &m[rank][j];
                m[i][j] -= d;
            }
        }
        rank += 1;
    }
    rank
}

/// A ℤ-basis of `{ x ∈ ℤ^n : A x = 0 }` for an integer matrix `A`
/// (`rows` of length `n`), obtained by unimodular reduction of `[Aᵀ | I]`.
pub fn integer_kernel(rows: &[IntVec], n: usize) -> Vec<IntVec> {
    let s = rows.len();
    let mut aug: Vec<IntVec> = (0..n)
        .map(|j| {
            let mut r: IntVec = rows.iter().map(|row| row[j].clone()).collect();
            r.extend((0..n).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let mut top = 0;
    for col in 0..s {
        loop {
            let pivot = (top..n)
                .filter(|&i| !aug[i][col].is_zero())
                .min_by(|&a, &b| aug[a][col].abs().cmp(&aug[b][col].abs()));
            let Some(p) = pivot else { break };
            aug.swap(top, p);
            let mut done = true;
            for i in top + 1..n {
                if aug[i][col].is_zero() {
                    continue;
                }
                let q = aug[i][col].div_floor(&aug[top][col]);
                let (head, tail) = aug.split_at_mut(i);
                axpy(&mut tail[0], &q, &head[top]);
                if !tail[0][col].is_zero() {
                    done = false;
                }
            }
            if done {
                top += 1;
                break;
            }
        }
    }
    aug[top..].iter().map(|r| r[s..].to_vec()).collect()
}

/// `y -= q * x`
fn axpy(y: &mut [BigInt], q: &BigInt, x: &[BigInt]) {
    if q.is_zero() {
        return;
    }
    for (a, b) in y.iter_mut().zip(x) {
        *a -= q * b;
    }
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn round_half_up(r: &Rational) -> BigInt {
    (r + Rational::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

struct GramSchmidt {
    mu: Vec<Vec<Rational>>,
    norms: Vec<Rational>,
}

impl GramSchmidt {
    fn of(b: &[IntVec]) -> Self {
        let n = b.len();
        let mut mu = vec![vec![Rational::zero(); n]; n];
        let mut norms: Vec<Rational> = Vec::with_capacity(n);
        // r[i][j] = <b_i, b*_j>
        let mut r = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut v = Rational::from_integer(dot(&b[i], &b[j]));
                for k in 0..j {
                    v -= &mu[j][k] * &r[i][k];
                }
                r[i][j] = v.clone();
                if j < i {
                    mu[i][j] = if norms[j].is_zero() { Rational::zero() } else { v / &norms[j] };
                } else {
                    norms.push(v);
                }
            }
        }
        Self { mu, norms }
    }
}

/// LLL-reduces a basis of linearly independent integer vectors with
/// Lovász parameter `delta` (typically 3/4).
pub fn lll(mut b: Vec<IntVec>, delta: &Rational) -> Vec<IntVec> {
    let n = b.len();
    if n < 2 {
        return b;
    }
    let mut gs = GramSchmidt::of(&b);
    let mut k = 1;
    while k < n {
        size_reduce(&mut b, &mut gs, k, k - 1);
        let mu = &gs.mu[k][k - 1];
        let lhs = &gs.norms[k];
        let rhs = (delta - mu * mu) * &gs.norms[k - 1];
        if *lhs < rhs {
            b.swap(k, k - 1);
            gs = GramSchmidt::of(&b);
            k = (k - 1).max(1);
        } else {
            for j in (0..k - 1).rev() {
                size_reduce(&mut b, &mut gs, k, j);
            }
            k += 1;
        }
    }
    b
}

fn size_reduce(b: &mut [IntVec], gs: &mut GramSchmidt, k: usize, j: usize) {
    let q = round_half_up(&gs.mu[k][j]);
    if q.is_zero() {
        return;
    }
    let (head, tail) = b.split_at_mut(k);
    axpy(&mut tail[0], &q, &head[j]);
    let qr = Rational::from_integer(q);
    for l in 0..j {
        let d = &qr * &gs.mu[j][l];
        gs.mu[k][l] -= d;
    }
    gs.mu[k][j] -= qr;
}

/// Divides by the content and flips the sign so the first nonzero entry is
/// positive.
pub fn normalize_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return;
    }
    let flip = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    for x in v.iter_mut() {
        *x = &*x / &g;
        if flip {
            *x = -&*x;
        }
    }
}

/// Ordering used for published relation bases: vectors whose support ends
/// earlier come first, ties broken lexicographically.
pub fn support_then_lex(a: &IntVec, b: &IntVec) -> std::cmp::Ordering {
    let last = |v: &IntVec| v.iter().rposition(|x| !x.is_zero());
    last(a).cmp(&last(b)).then_with(|| a.cmp(b))
}
