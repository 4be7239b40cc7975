//! Fundamental discriminants and their quadratic characters.
//!
//! A fundamental discriminant is an integer D with D ≡ 1 (mod 4) and
//! squarefree, or D = 4m with m ≡ 2, 3 (mod 4) and m squarefree. The
//! attached character chi_D(n) is the Kronecker symbol (D/n).

use crate::{QzError, Result};
use std::sync::OnceLock;

const TRIAL_LIMIT: u64 = 1_000_000;

// After dividing out every prime <= 1e6, a cofactor below 1e18 is 1, p, pq,
// or p^2 (anything else needs three factors > 1e6). Within that bound
// squarefree-ness reduces to a perfect-square test; beyond it we refuse.
const CERTIFY_LIMIT: u64 = 1_000_000_000_000_000_000;

// The windowed sieve marks p^2 | d only for p <= 1e6, so the smallest
// non-squarefree survivor it could miss is 3 * 1000003^2 (2p^2 and 8p^2
// land in congruence classes that are filtered anyway). Stay below it.
const SIEVE_LIMIT: u64 = 3_000_000_000_000;

pub(crate) fn primes_to_trial_limit() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::with_capacity(78_498);
        for i in 2..=n {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Kronecker symbol (a/n) for n >= 0, by binary reciprocity; the 2-adic
/// part of n and the sign of a are peeled off before the Jacobi loop.
pub fn kronecker(a: i64, n: u64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut result = 1i32;
    if n % 2 == 0 {
        if a % 2 == 0 {
            return 0;
        }
        let tz = n.trailing_zeros();
        n >>= tz;
        if tz % 2 == 1 {
            // (a/2) = +1 for a = +-1 mod 8, -1 for a = +-3 mod 8
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    // (a/1) = 1, and rem_euclid below would not reduce the sign part.
    if n == 1 {
        return result;
    }
    // (-1/n) for odd n > 0: -1 exactly when n = 3 mod 4.
    let mut a = if a < 0 {
        if n % 4 == 3 {
            result = -result;
        }
        (-(a as i128)).rem_euclid(n as i128) as u64
    } else {
        (a as u64) % n
    };
    if a == 0 {
        // gcd > 1 unless the modulus collapsed to 1 above.
        return 0;
    }
    loop {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 {
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
        if a == 0 {
            return if n == 1 { result } else { 0 };
        }
    }
}

// The defining congruence: m_abs is the quantity that must be squarefree,
// or None if disc falls in a dead residue class.
fn squarefree_part_target(disc: i64) -> Option<u64> {
    let r4 = disc.rem_euclid(4);
    if r4 == 1 {
        Some(disc.unsigned_abs())
    } else if r4 == 0 {
        let m = disc / 4;
        let mr = m.rem_euclid(4);
        if mr == 2 || mr == 3 {
            Some(m.unsigned_abs())
        } else {
            None
        }
    } else {
        None
    }
}

fn is_perfect_square(n: u64) -> bool {
    let r = n.isqrt();
    r * r == n
}

/// Exact fundamental-discriminant test: congruence class, trial division by
/// every prime <= 1e6, then a perfect-square check on the cofactor. Errors
/// only when the cofactor is too large to certify (never for |disc| in the
/// enumeration range).
pub fn is_fundamental(disc: i64) -> Result<bool> {
    if disc == 0 {
        return Err(QzError::Domain("discriminant must be nonzero"));
    }
    let Some(m_abs) = squarefree_part_target(disc) else {
        return Ok(false);
    };
    if m_abs == 1 {
        return Ok(true);
    }
    let mut r = m_abs;
    for &p in primes_to_trial_limit() {
        let p = p as u64;
        if p * p > r {
            // remaining cofactor is 1 or prime
            return Ok(true);
        }
        if r % p == 0 {
            r /= p;
            if r % p == 0 {
                return Ok(false);
            }
        }
    }
    if r == 1 {
        return Ok(true);
    }
    if r >= CERTIFY_LIMIT {
        return Err(QzError::Overflow("squarefree certification"));
    }
    Ok(!is_perfect_square(r))
}

/// A validated fundamental discriminant. `parity` is the a of the paper
/// of record n^a in the series: 1 for odd characters (disc < 0), else 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FundamentalDiscriminant {
    disc: i64,
    modulus: u64,
    parity: u8,
}

impl FundamentalDiscriminant {
    pub fn new(disc: i64) -> Result<Self> {
        if !is_fundamental(disc)? {
            return Err(QzError::NotFundamental(disc));
        }
        Ok(Self::new_unchecked(disc))
    }

    // For the enumeration sieve, which has already certified disc.
    fn new_unchecked(disc: i64) -> Self {
        FundamentalDiscriminant {
            disc,
            modulus: disc.unsigned_abs(),
            parity: if disc < 0 { 1 } else { 0 },
        }
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// a = (1 - chi(-1)) / 2
    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn chi(&self, n: u64) -> i32 {
        kronecker(self.disc, n)
    }

    /// chi(n) for n = 0..=n_max by a linear sieve; the Kronecker symbol is
    /// evaluated only at primes and extended by complete multiplicativity.
    pub fn chi_table(&self, n_max: usize) -> Vec<i8> {
        let mut chi = vec![0i8; n_max + 1];
        if n_max >= 1 {
            chi[1] = 1;
        }
        let mut spf_primes: Vec<u32> = Vec::new();
        let mut composite = vec![false; n_max + 1];
        for i in 2..=n_max {
            if !composite[i] {
                spf_primes.push(i as u32);
                chi[i] = kronecker(self.disc, i as u64) as i8;
            }
            for &p in &spf_primes {
                let ip = i * p as usize;
                if ip > n_max {
                    break;
                }
                composite[ip] = true;
                chi[ip] = chi[i] * chi[p as usize];
                if i % p as usize == 0 {
                    break;
                }
            }
        }
        chi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Positive,
}

/// Half-open window of moduli: d runs over [x_min, x_min + span).
#[derive(Debug, Clone, Copy)]
pub struct DiscriminantRange {
    pub x_min: u64,
    pub span: u64,
    pub sign: Sign,
}

// Moduli of fundamental discriminants occupy six classes mod 16.
// disc < 0: d = 3 mod 4, or d = 4, 8 mod 16.
// disc > 0: d = 1 mod 4, or d = 8, 12 mod 16.
fn allowed_mod16(sign: Sign) -> [bool; 16] {
    let mut ok = [false; 16];
    match sign {
        Sign::Negative => {
            for r in [3, 7, 11, 15, 4, 8] {
                ok[r] = true;
            }
        }
        Sign::Positive => {
            for r in [1, 5, 9, 13, 8, 12] {
                ok[r] = true;
            }
        }
    }
    ok
}

fn mark_square_multiples(p: u64, lo: u64, marks: &mut [bool]) {
    let p2 = p * p;
    let start = lo.next_multiple_of(p2);
    let mut j = start;
    let hi = lo + marks.len() as u64;
    while j < hi {
        marks[(j - lo) as usize] = true;
        j += p2;
    }
}

/// Cheap over-accepting filter: congruence classes mod 16 plus squares of
/// the first 200 primes. `enumerate_range` is the exact version.
pub fn prefilter_window(range: &DiscriminantRange) -> Vec<u64> {
    let ok16 = allowed_mod16(range.sign);
    let lo = range.x_min;
    let mut marks = vec![false; range.span as usize];
    for &p in primes_to_trial_limit().iter().skip(1).take(199) {
        mark_square_multiples(p as u64, lo, &mut marks);
    }
    (lo..lo + range.span)
        .filter(|&d| ok16[(d % 16) as usize] && !marks[(d - lo) as usize])
        .collect()
}

const ENUM_BLOCK: usize = 1 << 20;

/// All fundamental discriminants of the requested sign with modulus in the
/// half-open window, ascending by modulus. Exact: the block sieve crosses
/// out p^2 | d for every odd prime p <= 1e6 and the survivors only need a
/// perfect-square check (see SIEVE_LIMIT for why nothing else escapes).
pub fn enumerate_range(range: &DiscriminantRange) -> Result<Vec<FundamentalDiscriminant>> {
    let end = range
        .x_min
        .checked_add(range.span)
        .ok_or(QzError::Overflow("enumeration window"))?;
    if end > SIEVE_LIMIT {
        return Err(QzError::Overflow("enumeration window"));
    }
    if range.x_min == 0 {
        return Err(QzError::Domain("window must start at a positive modulus"));
    }
    let ok16 = allowed_mod16(range.sign);
    let sign = match range.sign {
        Sign::Negative => -1i64,
        Sign::Positive => 1i64,
    };
    let mut out = Vec::new();
    let mut marks = vec![false; ENUM_BLOCK.min(range.span as usize)];
    let mut lo = range.x_min;
    while lo < end {
        let hi = end.min(lo + ENUM_BLOCK as u64);
        let block = &mut marks[..(hi - lo) as usize];
        block.fill(false);
        for &p in primes_to_trial_limit().iter().skip(1) {
            let p = p as u64;
            if p * p >= hi {
                break;
            }
            mark_square_multiples(p, lo, block);
        }
        for d in lo..hi {
            if !ok16[(d % 16) as usize] || block[(d - lo) as usize] {
                continue;
            }
            let disc = sign * d as i64;
            // Square cofactors above the sieve bound (d or d/4 = p^2 with
            // p > 1e6) survive marking; squares are killed here instead.
            let m_abs = match squarefree_part_target(disc) {
                Some(m) => m,
                None => continue,
            };
            if m_abs > 1 && is_perfect_square(m_abs) {
                continue;
            }
            out.push(FundamentalDiscriminant::new_unchecked(disc));
        }
        lo = hi;
    }
    Ok(out)
}
