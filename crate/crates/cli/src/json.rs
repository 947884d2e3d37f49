//! JSON rendering with a fixed number format.

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use std::io;

/// `x` with 17 significant digits. Positional notation for exponents in
/// `[-5, 17)`, scientific otherwise.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

struct SigFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SigFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON; non-finite floats become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFormatter(PrettyFormatter::with_indent(b"  ")));
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    let mut s = String::from_utf8(out).expect("serde_json emits UTF-8");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [1.0, -2.5, 6.0 / 7.0, 1e-7, 123456.789, 1e20, f64::MIN_POSITIVE, 0.1 + 0.2] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_f64(1.0), "1.0000000000000000");
        assert!(format_f64(6.0 / 7.0).starts_with("0.857142857142857"));
        assert_eq!(format_f64(0.0), "0.0");
    }

    #[test]
    fn non_finite_becomes_null() {
        let s = to_json_string(&serde_json::json!({"a": 1.5}));
        assert_eq!(s, "{\n  \"a\": 1.5000000000000000\n}\n");
        assert_eq!(to_json_string(&f64::NAN), "null\n");
    }
}
