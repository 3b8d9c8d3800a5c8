//! Decimal numbers with unit suffixes.

use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Field,
    Frequency,
    Time,
    Temperature,
    Power,
    Angle,
    Length,
}

impl Dimension {
    pub fn name(self) -> &'static str {
        match self {
            Dimension::Field => "magnetic field",
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Temperature => "temperature",
            Dimension::Power => "power",
            Dimension::Angle => "angle",
            Dimension::Length => "length",
        }
    }

    pub fn units(self) -> impl Iterator<Item = Unit> {
        UNITS.iter().copied().filter(move |u| u.dimension == self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unit {
    pub symbol: &'static str,
    pub dimension: Dimension,
    scale: Scale,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scale {
    /// SI value = magnitude x 10^k
    Decade(i32),
    /// SI value = magnitude x pi / 180
    Degree,
}

macro_rules! unit {
    ($s:expr, $d:ident, $k:expr) => {
        Unit { symbol: $s, dimension: Dimension::$d, scale: Scale::Decade($k) }
    };
}

/// Every accepted suffix. SI base units: T, Hz, s, K, W, rad, m.
pub const UNITS: &[Unit] = &[
    unit!("T", Field, 0),
    unit!("mT", Field, -3),
    unit!("GHz", Frequency, 9),
    unit!("MHz", Frequency, 6),
    unit!("kHz", Frequency, 3),
    unit!("Hz", Frequency, 0),
    unit!("s", Time, 0),
    unit!("ms", Time, -3),
    unit!("us", Time, -6),
    unit!("\u{b5}s", Time, -6),
    unit!("ns", Time, -9),
    unit!("K", Temperature, 0),
    unit!("W", Power, 0),
    unit!("mW", Power, -3),
    Unit { symbol: "deg", dimension: Dimension::Angle, scale: Scale::Degree },
    unit!("rad", Angle, 0),
    unit!("m", Length, 0),
    unit!("mm", Length, -3),
    unit!("um", Length, -6),
];

pub fn lookup(symbol: &str) -> Option<Unit> {
    UNITS.iter().copied().find(|u| u.symbol == symbol)
}

pub fn unit_list(units: impl Iterator<Item = Unit>) -> String {
    units.map(|u| u.symbol).collect::<Vec<_>>().join(", ")
}

fn rescale(m: f64, k: i32) -> f64 {
    // one correctly rounded operation per conversion
    match k {
        0 => m,
        k if k > 0 => m * 10f64.powi(k),
        k => m / 10f64.powi(-k),
    }
}

impl Unit {
    pub fn to_si(self, magnitude: f64) -> f64 {
        match self.scale {
            Scale::Decade(k) => rescale(magnitude, k),
            Scale::Degree => magnitude * PI / 180.0,
        }
    }

    /// Magnitude of `si` expressed in this unit.
    pub fn from_si(self, si: f64) -> f64 {
        match self.scale {
            Scale::Decade(k) => rescale(si, -k),
            Scale::Degree => si * 180.0 / PI,
        }
    }

    /// `magnitude` (in self) expressed in `target`, exact when they coincide.
    pub fn convert(self, magnitude: f64, target: Unit) -> f64 {
        match (self.scale, target.scale) {
            (a, b) if a == b => magnitude,
            (Scale::Decade(a), Scale::Decade(b)) => rescale(magnitude, a - b),
            _ => target.from_si(self.to_si(magnitude)),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub magnitude: f64,
    pub unit: Option<Unit>,
}

impl Quantity {
    pub fn si(&self) -> f64 {
        self.unit.map_or(self.magnitude, |u| u.to_si(self.magnitude))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantityError {
    /// Character offset of the offending token within the input.
    pub offset: usize,
    pub message: String,
}

/// Length in bytes of the leading decimal number of `s`: optional sign,
/// digits with optional fraction, optional exponent.
pub fn number_prefix(s: &str) -> usize {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        let frac_start = i + 1;
        let mut j = frac_start;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        digits += j - frac_start;
        if digits > 0 {
            i = j;
        }
    }
    if digits == 0 {
        return 0;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            i = j;
        }
    }
    i
}

/// Parse a plain decimal number; the whole input must be consumed.
pub fn parse_number(s: &str) -> Option<f64> {
    let n = number_prefix(s);
    if n == 0 || n != s.len() {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parse `<number> [unit]`, with optional whitespace before the unit.
pub fn parse_quantity(text: &str) -> Result<Quantity, QuantityError> {
    let lead = text.len() - text.trim_start().len();
    let s = text.trim();
    let n = number_prefix(s);
    if n == 0 {
        return Err(QuantityError {
            offset: text[..lead].chars().count(),
            message: format!("expected a decimal number, found `{s}`"),
        });
    }
    let magnitude = s[..n].parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| QuantityError {
        offset: text[..lead].chars().count(),
        message: format!("number `{}` is out of range", &s[..n]),
    })?;
    let rest = &s[n..];
    let suffix = rest.trim_start();
    if suffix.is_empty() {
        return Ok(Quantity { magnitude, unit: None });
    }
    let offset = text[..lead + n + (rest.len() - suffix.len())].chars().count();
    match lookup(suffix) {
        Some(unit) => Ok(Quantity { magnitude, unit: Some(unit) }),
        None => Err(QuantityError {
            offset,
            message: format!("unknown unit `{suffix}`; valid units are {}", unit_list(UNITS.iter().copied())),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn numbers() {
        for (s, v) in [("1", 1.0), ("-2.5", -2.5), ("+.5", 0.5), ("3.", 3.0), ("1e3", 1e3), ("4E-2", 0.04)] {
            assert_eq!(parse_number(s), Some(v), "{s}");
        }
        for s in ["", ".", "e3", "1e", "inf", "NaN", "0x10", "1,0", "1e400", "--1", "1 "] {
            assert_eq!(parse_number(s), None, "{s}");
        }
    }

    #[test]
    fn quantities() {
        let q = parse_quantity("600 ns").unwrap();
        assert_eq!(q.si(), 6.0e-7);
        assert_eq!(parse_quantity("600ns").unwrap().si(), 6.0e-7);
        assert_eq!(parse_quantity("90 deg").unwrap().si(), PI / 2.0);
        assert_eq!(parse_quantity("2").unwrap().unit, None);
        let e = parse_quantity("1.49 s\u{b5}").unwrap_err();
        assert_eq!(e.offset, 5);
        for u in UNITS {
            assert!(e.message.contains(u.symbol));
        }
        assert_eq!(parse_quantity("  x").unwrap_err().offset, 2);
    }

    #[test]
    fn conversion_is_exact_within_a_unit() {
        let mt = lookup("mT").unwrap();
        assert_eq!(mt.convert(0.123456789, mt), 0.123456789);
        assert_eq!(lookup("ns").unwrap().convert(600.0, lookup("s").unwrap()), 6e-7);
        assert_eq!(lookup("GHz").unwrap().convert(240.0, lookup("MHz").unwrap()), 240e3);
    }

    proptest! {
        #[test]
        fn unit_round_trip(m in -1e6f64..1e6, idx in 0usize..19) {
            let u = UNITS[idx];
            let text = format!("{m:e} {}", u.symbol);
            let q = parse_quantity(&text).unwrap();
            prop_assert_eq!(q.magnitude, m);
            let si = q.si();
            let expected = match u.scale {
                Scale::Decade(k) => m * 10f64.powf(k as f64),
                Scale::Degree => m * PI / 180.0,
            };
            prop_assert!((si - expected).abs() <= 2.0 * f64::EPSILON * expected.abs());
            prop_assert!((u.from_si(si) - m).abs() <= 2.0 * f64::EPSILON * m.abs());
        }

        #[test]
        fn no_panics(s in "\\PC{0,20}") {
            let _ = parse_quantity(&s);
        }
    }
}
