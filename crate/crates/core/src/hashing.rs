//! Small deterministic hashing helpers shared by menus and rules.
//!
//! Nothing here depends on `std::hash::RandomState`, so digests are stable
//! across processes and platforms.

/// The splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive accumulator over `u64` words.
#[derive(Clone, Copy, Debug)]
pub struct Digest(u64);

impl Digest {
    pub fn new(domain: u64) -> Self {
        Digest(splitmix64(domain))
    }

    pub fn write(&mut self, word: u64) -> &mut Self {
        self.0 = splitmix64(self.0 ^ splitmix64(word));
        self
    }

    pub fn write_str(&mut self, s: &str) -> &mut Self {
        self.write(s.len() as u64);
        for chunk in s.as_bytes().chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.write(u64::from_le_bytes(buf));
        }
        self
    }

    /// Hashes a real rounded to 12 significant digits.
    pub fn write_f64(&mut self, x: f64) -> &mut Self {
        let (mantissa, exponent) = round_significant(x);
        self.write(mantissa as u64).write(exponent as u64)
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

/// Rounds `x` to 12 significant digits and returns `(mantissa, exponent)` with
/// `x ≈ mantissa · 10^(exponent − 11)`.
fn round_significant(x: f64) -> (i64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (0, if x.is_nan() { i32::MIN } else if x > 0.0 { i32::MAX } else if x < 0.0 { i32::MIN + 1 } else { 0 });
    }
    let mut exponent = x.abs().log10().floor() as i32;
    let mut mantissa = (x / 10f64.powi(exponent - 11)).round() as i64;
    // rounding can carry into a 13th digit
    if mantissa.abs() >= 1_000_000_000_000 {
        exponent += 1;
        mantissa = (x / 10f64.powi(exponent - 11)).round() as i64;
    }
    (mantissa, exponent)
}

/// Maps a hash to a uniform real in `[0, 1)`.
pub fn unit_interval(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_ignores_noise_below_twelve_digits() {
        let mut a = Digest::new(1);
        let mut b = Digest::new(1);
        a.write_f64(0.1 + 0.2);
        b.write_f64(0.3);
        assert_eq!(a.finish(), b.finish());

        let mut c = Digest::new(1);
        c.write_f64(0.300000001);
        assert_ne!(a.finish(), c.finish());
    }

    #[test]
    fn unit_interval_bounds() {
        for i in 0..1000u64 {
            let u = unit_interval(splitmix64(i));
            assert!((0.0..1.0).contains(&u));
        }
        assert_eq!(unit_interval(0), 0.0);
        assert!(unit_interval(u64::MAX) < 1.0);
    }
}
