//! Zero-list file format: a versioned comment header, then one line per
//! discriminant "disc count t1 t2 ..." ascending by modulus. Ordinates
//! carry 10 significant digits, enough to round-trip the refined zeros.

use qz_core::Sign;
use std::fmt::Write as _;

pub const FORMAT_TAG: &str = "qzv1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Header {
    pub x_min: u64,
    pub span: u64,
    pub digits: u32,
    pub t_max: f64,
    pub step_divisor: u32,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub disc: i64,
    pub zeros: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub header: Header,
    pub records: Vec<Record>,
}

impl Header {
    /// The two comment lines opening every file: the versioned field line
    /// and the range-convention line.
    pub fn serialize(&self) -> String {
        let sign = match self.sign {
            Sign::Negative => "-1",
            Sign::Positive => "+1",
        };
        format!(
            "# {FORMAT_TAG} X={} DX={} D={} tmax={:?} div={}\n\
             # convention moduli=[X,X+DX) sign={sign} order=modulus-ascending sigfigs=10\n",
            self.x_min, self.span, self.digits, self.t_max, self.step_divisor
        )
    }
}

pub fn format_ordinate(t: f64) -> String {
    format!("{t:.9e}")
}

pub fn record_line(disc: i64, zeros: &[f64]) -> String {
    let mut line = format!("{disc} {}", zeros.len());
    for &t in zeros {
        let _ = write!(line, " {}", format_ordinate(t));
    }
    line.push('\n');
    line
}

fn bad(line_no: usize, what: &str) -> String {
    format!("line {line_no}: {what}")
}

fn parse_header_line(line: &str) -> Result<Header, String> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("#") || tokens.next() != Some(FORMAT_TAG) {
        return Err(format!("missing '# {FORMAT_TAG}' header"));
    }
    let (mut x, mut dx, mut d, mut tmax, mut div) = (None, None, None, None, None);
    for tok in tokens {
        let (key, val) = tok.split_once('=').ok_or("malformed header token")?;
        match key {
            "X" => x = Some(val.parse::<u64>().map_err(|e| format!("X: {e}"))?),
            "DX" => dx = Some(val.parse::<u64>().map_err(|e| format!("DX: {e}"))?),
            "D" => d = Some(val.parse::<u32>().map_err(|e| format!("D: {e}"))?),
            "tmax" => tmax = Some(val.parse::<f64>().map_err(|e| format!("tmax: {e}"))?),
            "div" => div = Some(val.parse::<u32>().map_err(|e| format!("div: {e}"))?),
            other => return Err(format!("unknown header field '{other}'")),
        }
    }
    Ok(Header {
        x_min: x.ok_or("header missing X")?,
        span: dx.ok_or("header missing DX")?,
        digits: d.ok_or("header missing D")?,
        t_max: tmax.ok_or("header missing tmax")?,
        step_divisor: div.ok_or("header missing div")?,
        sign: Sign::Negative,
    })
}

pub fn parse(text: &str) -> Result<Dataset, String> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or("empty file")?;
    let mut header = parse_header_line(first)?;
    let mut records: Vec<Record> = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            // the convention line is the only comment we interpret
            if rest.contains("sign=+1") {
                header.sign = Sign::Positive;
            }
            continue;
        }
        let mut tok = line.split_whitespace();
        let disc: i64 = tok
            .next()
            .ok_or_else(|| bad(line_no, "empty record"))?
            .parse()
            .map_err(|e| bad(line_no, &format!("discriminant: {e}")))?;
        let count: usize = tok
            .next()
            .ok_or_else(|| bad(line_no, "missing count"))?
            .parse()
            .map_err(|e| bad(line_no, &format!("count: {e}")))?;
        let zeros = tok
            .map(str::parse::<f64>)
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| bad(line_no, &format!("ordinate: {e}")))?;
        if zeros.len() != count {
            return Err(bad(line_no, "count does not match ordinate list"));
        }
        let sign_ok = match header.sign {
            Sign::Negative => disc < 0,
            Sign::Positive => disc > 0,
        };
        if !sign_ok {
            return Err(bad(line_no, "record sign disagrees with header"));
        }
        let m = disc.unsigned_abs();
        if m < header.x_min || m - header.x_min >= header.span {
            return Err(bad(line_no, "modulus outside the header window"));
        }
        if let Some(prev) = records.last() {
            if prev.disc.unsigned_abs() >= m {
                return Err(bad(line_no, "moduli not strictly ascending"));
            }
        }
        let in_range = |t: f64| t > 0.0 && t <= header.t_max * (1.0 + 1e-9);
        if !zeros.iter().all(|&t| in_range(t)) {
            return Err(bad(line_no, "ordinate outside (0, tmax]"));
        }
        if !zeros.windows(2).all(|w| w[0] < w[1]) {
            return Err(bad(line_no, "ordinates not strictly ascending"));
        }
        records.push(Record { disc, zeros });
    }
    Ok(Dataset { header, records })
}

pub fn serialize(ds: &Dataset) -> String {
    let mut out = ds.header.serialize();
    for rec in &ds.records {
        out.push_str(&record_line(rec.disc, &rec.zeros));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header() -> Header {
        Header {
            x_min: 1_000_000,
            span: 10_000,
            digits: 15,
            t_max: 1.0,
            step_divisor: 50,
            sign: Sign::Negative,
        }
    }

    #[test]
    fn ordinates_carry_ten_significant_digits() {
        assert_eq!(format_ordinate(0.0013104755), "1.310475500e-3");
        assert_eq!(format_ordinate(0.682156782024), "6.821567820e-1");
        let t = 0.999999999949; // rounds up across a digit boundary
        assert_eq!(format_ordinate(t), "9.999999999e-1");
    }

    #[test]
    fn round_trip_preserves_records() {
        let ds = Dataset {
            header: header(),
            records: vec![
                Record { disc: -1_000_003, zeros: vec![0.12345678912345, 0.9] },
                Record { disc: -1_000_004, zeros: vec![] },
                Record { disc: -1_000_007, zeros: vec![0.5] },
            ],
        };
        let text = serialize(&ds);
        let back = parse(&text).unwrap();
        assert_eq!(back.header, ds.header);
        assert_eq!(back.records.len(), 3);
        for (a, b) in back.records.iter().zip(&ds.records) {
            assert_eq!(a.disc, b.disc);
            assert_eq!(a.zeros.len(), b.zeros.len());
            for (x, y) in a.zeros.iter().zip(&b.zeros) {
                assert!((x - y).abs() <= 5e-10 * y.abs());
            }
        }
        // second serialization is bit-stable
        assert_eq!(serialize(&back), text);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        let good = serialize(&Dataset {
            header: header(),
            records: vec![Record { disc: -1_000_003, zeros: vec![0.5] }],
        });
        parse(&good).unwrap();
        for (needle, swap) in [
            ("# qzv1", "# qzv2"),
            ("-1000003 1", "-1000003 2"),    // count mismatch
            ("-1000003 1", "1000003 1"),     // sign mismatch
            ("-1000003 1", "-115147 1"),     // outside window
            ("5.000000000e-1", "1.200000000e0"), // beyond tmax
        ] {
            let broken = good.replace(needle, swap);
            assert!(parse(&broken).is_err(), "accepted {swap:?}");
        }
        assert!(parse("").is_err());
        // descending moduli
        let two = format!(
            "{}-1000004 0\n-1000003 0\n",
            header().serialize()
        );
        assert!(parse(&two).is_err());
    }

    #[test]
    fn header_survives_field_round_trip() {
        for (tmax, div, d) in [(1.0, 50, 15), (1.025, 30, 8), (0.5, 7, 3)] {
            let h = Header { t_max: tmax, step_divisor: div, digits: d, ..header() };
            let parsed = parse(&h.serialize()).unwrap().header;
            assert_eq!(parsed, h);
        }
    }

    proptest! {
        // parse(serialize(x)) = x at the stated precision
        #[test]
        fn format_round_trip(
            discs in proptest::collection::btree_set(1u64..10_000, 0..20),
            raw in proptest::collection::vec(
                proptest::collection::vec(1e-6f64..1.0, 0..6), 20),
        ) {
            let h = header();
            let records: Vec<Record> = discs.iter().zip(&raw).map(|(&off, zs)| {
                let mut zeros = zs.clone();
                zeros.sort_by(f64::total_cmp);
                zeros.dedup();
                Record { disc: -((h.x_min + off) as i64), zeros }
            }).collect();
            let ds = Dataset { header: h, records };
            let text = serialize(&ds);
            let back = parse(&text).unwrap();
            prop_assert_eq!(back.records.len(), ds.records.len());
            for (a, b) in back.records.iter().zip(&ds.records) {
                prop_assert_eq!(a.disc, b.disc);
                for (x, y) in a.zeros.iter().zip(&b.zeros) {
                    prop_assert!((x - y).abs() <= 5e-10 * y.abs());
                }
            }
            prop_assert_eq!(serialize(&back), text);
        }
    }
}
