use serde::Serialize;

use crate::error::{invalid, Result};

/// Built-in primitive polynomials, indexed by `m - 3`. Bit `i` is the
/// coefficient of `x^i`.
pub const PRIMITIVE_POLYS: [u32; 10] = [
    0b1011,           // m = 3:  x^3 + x + 1
    0b1_0011,         // m = 4:  x^4 + x + 1
    0b10_0101,        // m = 5:  x^5 + x^2 + 1
    0b100_0011,       // m = 6:  x^6 + x + 1
    0b1000_1001,      // m = 7:  x^7 + x^3 + 1
    0b1_0001_1101,    // m = 8:  x^8 + x^4 + x^3 + x^2 + 1
    0b10_0001_0001,   // m = 9:  x^9 + x^4 + 1
    0b100_0000_1001,  // m = 10: x^10 + x^3 + 1
    0b1000_0000_0101, // m = 11: x^11 + x^2 + 1
    0x1053,           // m = 12: x^12 + x^6 + x^4 + x + 1
];

pub const MIN_M: u32 = 3;
pub const MAX_M: u32 = 12;

/// GF(2^m) with exponent and logarithm tables over a primitive element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GfContext {
    m: u32,
    primitive_poly: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GfContext {
    pub fn new(m: u32) -> Result<Self> {
        if !(MIN_M..=MAX_M).contains(&m) {
            return invalid(format!("field degree m = {m} outside {MIN_M}..={MAX_M}"));
        }
        Self::with_poly(m, PRIMITIVE_POLYS[(m - MIN_M) as usize])
    }

    pub fn with_poly(m: u32, primitive_poly: u32) -> Result<Self> {
        if !(MIN_M..=MAX_M).contains(&m) || primitive_poly >> m != 1 {
            return invalid(format!("polynomial {primitive_poly:#b} is not of degree {m}"));
        }
        let order = (1usize << m) - 1;
        // exp is doubled so products index without a modulo.
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x = 1u32;
        for i in 0..order {
            if i > 0 && x == 1 {
                return invalid(format!("polynomial {primitive_poly:#b} is not primitive"));
            }
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x >> m & 1 == 1 {
                x ^= primitive_poly;
            }
        }
        if x != 1 {
            return invalid(format!("polynomial {primitive_poly:#b} is not primitive"));
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { m, primitive_poly, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// Multiplicative group order `2^m - 1`.
    pub fn order(&self) -> usize {
        (1usize << self.m) - 1
    }

    /// `alpha^i` for any integer `i`.
    pub fn alpha_pow(&self, i: i64) -> u16 {
        self.exp[i.rem_euclid(self.order() as i64) as usize]
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, x: u16) -> usize {
        debug_assert!(x != 0);
        self.log[x as usize] as usize
    }

    pub fn exp_table(&self) -> &[u16] {
        &self.exp[..self.order()]
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "zero has no inverse");
        self.exp[(self.order() - self.log[a as usize] as usize) % self.order()]
    }

    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b))
    }
}
