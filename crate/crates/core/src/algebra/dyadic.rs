use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact dyadic rational `num / 2^shift`, kept in lowest terms.
///
/// Structure constants of spin-1/2 product operators are always of the form
/// `±2^-k`, and sums of them stay dyadic, so this type makes identities such
/// as Jacobi checkable with `==`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: i64,
    shift: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, shift: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, shift: 0 };

    pub fn new(num: i64, shift: u32) -> Self {
        Dyadic { num, shift }.normalized()
    }

    /// `sign * 2^-shift`.
    pub fn signed_power(negative: bool, shift: u32) -> Self {
        Dyadic {
            num: if negative { -1 } else { 1 },
            shift,
        }
    }

    pub fn numerator(self) -> i64 {
        self.num
    }

    pub fn shift(self) -> u32 {
        self.shift
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 * (-(self.shift as f64)).exp2()
    }

    fn normalized(mut self) -> Self {
        if self.num == 0 {
            return Dyadic::ZERO;
        }
        let tz = self.num.trailing_zeros().min(self.shift);
        self.num >>= tz;
        self.shift -= tz;
        self
    }

    fn aligned(self, other: Dyadic) -> (i64, i64, u32) {
        let shift = self.shift.max(other.shift);
        let a = self.num << (shift - self.shift);
        let b = other.num << (shift - other.shift);
        (a, b, shift)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        let (a, b, shift) = self.aligned(rhs);
        Dyadic { num: a + b, shift }.normalized()
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        self + (-rhs)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -self.num,
            shift: self.shift,
        }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        Dyadic {
            num: self.num * rhs.num,
            shift: self.shift + rhs.shift,
        }
        .normalized()
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(*other);
        a.cmp(&b)
    }
}

/// Printed as `p/2^k`, e.g. `-1/2^0` or `1/2^2`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.shift)
    }
}

impl std::str::FromStr for Dyadic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (num, den) = s
            .split_once("/2^")
            .ok_or_else(|| format!("expected p/2^k, got {s:?}"))?;
        let num: i64 = num.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
        let shift: u32 = den.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
        Ok(Dyadic::new(num, shift))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_and_adds() {
        let half = Dyadic::new(1, 1);
        let quarter = Dyadic::new(2, 3);
        assert_eq!(quarter, Dyadic::new(1, 2));
        assert_eq!(half + quarter, Dyadic::new(3, 2));
        assert_eq!(half - half, Dyadic::ZERO);
        assert_eq!(half * half, quarter);
        assert_eq!((half + half), Dyadic::ONE);
        assert_eq!((-quarter).to_f64(), -0.25);
    }

    #[test]
    fn display_round_trips() {
        for d in [Dyadic::new(-1, 0), Dyadic::new(3, 5), Dyadic::ZERO] {
            let s = d.to_string();
            assert_eq!(s.parse::<Dyadic>().unwrap(), d);
        }
        assert_eq!(Dyadic::new(-1, 0).to_string(), "-1/2^0");
    }
}
