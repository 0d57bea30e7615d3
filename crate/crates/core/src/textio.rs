//! Text fixture formats: jets, gluing and gauge tuples, Hessian pairs,
//! parameter-dependent families, and complex literals.
//!
//! All writers emit floats with the shortest decimal representation
//! that round-trips bit-exactly, so parse(write(x)) == x coefficient
//! for coefficient.  Parsers skip blank lines and `#` comments and
//! report failures with 1-based line numbers.

use nalgebra::Matrix4;
use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::HessianForm;
use crate::germ::DiffeoJet;
use crate::jet2::Jet2;
use crate::lab::{FamilyPoint, Rank1Family, TDependentJet};
use crate::orbit::{GaugeTuple, GluingTuple};

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Non-blank, non-comment lines with their 1-based numbers.
struct Lines<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Lines { items, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.items.get(self.pos).copied();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.items.get(self.pos).copied()
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.items.last().map_or(0, |(n, _)| *n);
        self.next().ok_or_else(|| perr(last + 1, format!("expected {what}, found end of input")))
    }
}

fn parse_f64(line: usize, token: &str) -> Result<f64> {
    token
        .parse()
        .map_err(|_| perr(line, format!("expected a decimal float, found `{token}`")))
}

fn parse_usize(line: usize, token: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| perr(line, format!("expected a nonnegative integer, found `{token}`")))
}

/// `re+imi` literal, also accepting pure-real (`0.5`) and pure-imaginary
/// (`2i`, `-i`) forms.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim();
    if t.is_empty() {
        return Err(perr(0, "empty complex literal"));
    }
    let Some(body) = t.strip_suffix(['i', 'I']) else {
        return Ok(Complex64::new(parse_f64(0, t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let unit = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        other => parse_f64(0, other),
    };
    match split {
        Some(i) => Ok(Complex64::new(parse_f64(0, &body[..i])?, unit(&body[i..])?)),
        None => Ok(Complex64::new(0.0, unit(body)?)),
    }
}

/// Canonical `re+imi` form.
pub fn write_complex(c: Complex64) -> String {
    if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Jet text format: a header `order k`, then one `p q re im` line per
/// nonzero coefficient in graded-lexicographic order.
pub fn write_jet(jet: &Jet2) -> String {
    let mut out = format!("order {}\n", jet.order());
    for (p, q, c) in jet.iter() {
        if c != Complex64::ZERO {
            let _ = writeln!(out, "{p} {q} {} {}", c.re, c.im);
        }
    }
    out
}

fn parse_jet_block(lines: &mut Lines) -> Result<Jet2> {
    let (ln, header) = lines.expect("`order <k>` header")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 || toks[0] != "order" {
        return Err(perr(ln, format!("expected `order <k>`, found `{header}`")));
    }
    let order = parse_usize(ln, toks[1])?;
    let mut jet = Jet2::zero(order).map_err(|e| perr(ln, e.to_string()))?;
    while let Some((ln, line)) = lines.peek() {
        if line.starts_with("order") {
            break;
        }
        lines.next();
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(perr(ln, format!("expected `p q re im`, found `{line}`")));
        }
        let p = parse_usize(ln, toks[0])?;
        let q = parse_usize(ln, toks[1])?;
        if p + q > order {
            return Err(perr(ln, format!("monomial ({p},{q}) exceeds jet order {order}")));
        }
        let re = parse_f64(ln, toks[2])?;
        let im = parse_f64(ln, toks[3])?;
        jet.set(p, q, Complex64::new(re, im));
    }
    Ok(jet)
}

/// A single jet; trailing content is an error.
pub fn parse_jet(text: &str) -> Result<Jet2> {
    let mut lines = Lines::new(text);
    let jet = parse_jet_block(&mut lines)?;
    if let Some((ln, line)) = lines.peek() {
        return Err(perr(ln, format!("unexpected trailing content `{line}`")));
    }
    Ok(jet)
}

/// Gluing tuple file: header `n <int> order <int>`, then n-1 jet blocks.
pub fn write_tuple(tuple: &GluingTuple) -> String {
    let mut out = format!("n {} order {}\n", tuple.pinches(), tuple.order());
    for map in tuple.maps() {
        out.push_str(&write_jet(map.jet()));
    }
    out
}

fn parse_tuple_header(lines: &mut Lines) -> Result<(usize, usize, usize)> {
    let (ln, header) = lines.expect("`n <int> order <int>` header")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != "n" || toks[2] != "order" {
        return Err(perr(ln, format!("expected `n <int> order <int>`, found `{header}`")));
    }
    Ok((ln, parse_usize(ln, toks[1])?, parse_usize(ln, toks[3])?))
}

fn parse_jet_blocks(lines: &mut Lines, count: usize, order: usize) -> Result<Vec<DiffeoJet>> {
    let mut jets = Vec::with_capacity(count);
    for _ in 0..count {
        let at = lines.peek().map_or(0, |(n, _)| n);
        let jet = parse_jet_block(lines)?;
        if jet.order() != order {
            return Err(perr(
                at,
                format!("jet order {} disagrees with the header order {order}", jet.order()),
            ));
        }
        jets.push(DiffeoJet::new(jet).map_err(|e| perr(at, e.to_string()))?);
    }
    if let Some((ln, line)) = lines.peek() {
        return Err(perr(ln, format!("unexpected trailing content `{line}`")));
    }
    Ok(jets)
}

pub fn parse_tuple(text: &str) -> Result<GluingTuple> {
    let mut lines = Lines::new(text);
    let (ln, n, order) = parse_tuple_header(&mut lines)?;
    if n < 2 {
        return Err(perr(ln, format!("a gluing tuple needs n >= 2 pinch points, got {n}")));
    }
    GluingTuple::new(parse_jet_blocks(&mut lines, n - 1, order)?)
}

/// Gauge tuple file: header `n <int> order <int>`, then n jet blocks.
pub fn write_gauge(gauge: &GaugeTuple) -> String {
    let mut out = format!("n {} order {}\n", gauge.len(), gauge.psis()[0].order());
    for psi in gauge.psis() {
        out.push_str(&write_jet(psi.jet()));
    }
    out
}

pub fn parse_gauge(text: &str) -> Result<GaugeTuple> {
    let mut lines = Lines::new(text);
    let (ln, n, order) = parse_tuple_header(&mut lines)?;
    if n < 1 {
        return Err(perr(ln, "a gauge tuple needs at least one entry"));
    }
    GaugeTuple::new(parse_jet_blocks(&mut lines, n, order)?)
        .map_err(|e| perr(ln, e.to_string()))
}

/// Hessian pair file: a `hessian` header, then two 4x4 matrices as
/// 16 + 16 whitespace-separated decimals, row-major.
pub fn write_hessian(h: &HessianForm) -> String {
    let mut out = String::from("hessian\n");
    let (q1, q2) = h.components();
    for m in [q1, q2] {
        for r in 0..4 {
            let row: Vec<String> = (0..4).map(|c| m[(r, c)].to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

pub fn parse_hessian(text: &str) -> Result<HessianForm> {
    let mut lines = Lines::new(text);
    let (ln, header) = lines.expect("`hessian` header")?;
    if header != "hessian" {
        return Err(perr(ln, format!("expected `hessian`, found `{header}`")));
    }
    let mut vals = Vec::with_capacity(32);
    while let Some((ln, line)) = lines.next() {
        for tok in line.split_whitespace() {
            vals.push(parse_f64(ln, tok)?);
        }
        if vals.len() > 32 {
            return Err(perr(ln, format!("expected 32 entries, found more")));
        }
    }
    if vals.len() != 32 {
        let last = 0;
        return Err(perr(last, format!("expected 32 entries, found {}", vals.len())));
    }
    let q1 = Matrix4::from_row_slice(&vals[..16]);
    let q2 = Matrix4::from_row_slice(&vals[16..]);
    Ok(HessianForm::new(q1, q2))
}

/// Family file: header `family n_points 2 t_min <f> t_max <f>`, then
/// per focus point a 4x4 frame (16 decimals) and a chart jet whose
/// coefficients are polynomials in t, one line per monomial:
/// `p q : re0 im0 re1 im1 ...`.
pub fn write_family(family: &Rank1Family) -> String {
    let (t_min, t_max) = family.interval();
    let mut out = format!("family n_points 2 t_min {t_min} t_max {t_max}\n");
    for point in family.points() {
        for r in 0..4 {
            let row: Vec<String> =
                (0..4).map(|c| point.frame[(r, c)].to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        for (p, q, poly) in point.chart.coeff_polys() {
            let coeffs: Vec<String> = poly
                .iter()
                .flat_map(|c| [c.re.to_string(), c.im.to_string()])
                .collect();
            let _ = writeln!(out, "{p} {q} : {}", coeffs.join(" "));
        }
    }
    out
}

fn parse_frame(lines: &mut Lines) -> Result<Matrix4<f64>> {
    let mut vals = Vec::with_capacity(16);
    while vals.len() < 16 {
        let (ln, line) = lines.expect("frame entries")?;
        if line.contains(':') {
            return Err(perr(ln, "chart line before the 4x4 frame was complete"));
        }
        for tok in line.split_whitespace() {
            vals.push(parse_f64(ln, tok)?);
        }
        if vals.len() > 16 {
            return Err(perr(ln, "more than 16 frame entries"));
        }
    }
    Ok(Matrix4::from_row_slice(&vals))
}

fn parse_chart(lines: &mut Lines) -> Result<TDependentJet> {
    let mut rows: Vec<(usize, usize, Vec<Complex64>)> = Vec::new();
    let mut order = 0;
    while let Some((ln, line)) = lines.peek() {
        if !line.contains(':') {
            break;
        }
        lines.next();
        let (head, tail) = line.split_once(':').expect("peeked for a colon");
        let idx: Vec<&str> = head.split_whitespace().collect();
        if idx.len() != 2 {
            return Err(perr(ln, format!("expected `p q :`, found `{head}`")));
        }
        let p = parse_usize(ln, idx[0])?;
        let q = parse_usize(ln, idx[1])?;
        let toks: Vec<&str> = tail.split_whitespace().collect();
        if toks.is_empty() || toks.len() % 2 != 0 {
            return Err(perr(ln, "coefficient polynomials need re/im pairs"));
        }
        let mut poly = Vec::with_capacity(toks.len() / 2);
        for pair in toks.chunks(2) {
            poly.push(Complex64::new(parse_f64(ln, pair[0])?, parse_f64(ln, pair[1])?));
        }
        order = order.max(p + q);
        rows.push((p, q, poly));
    }
    if rows.is_empty() {
        let at = lines.peek().map_or(0, |(n, _)| n);
        return Err(perr(at, "each focus point needs at least one chart line"));
    }
    let mut chart = TDependentJet::new(order).map_err(|e| perr(0, e.to_string()))?;
    for (p, q, poly) in rows {
        chart.set(p, q, poly);
    }
    Ok(chart)
}

pub fn parse_family(text: &str) -> Result<Rank1Family> {
    let mut lines = Lines::new(text);
    let (ln, header) = lines.expect("family header")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 7
        || toks[0] != "family"
        || toks[1] != "n_points"
        || toks[3] != "t_min"
        || toks[5] != "t_max"
    {
        return Err(perr(
            ln,
            format!("expected `family n_points 2 t_min <f> t_max <f>`, found `{header}`"),
        ));
    }
    let n_points = parse_usize(ln, toks[2])?;
    if n_points != 2 {
        return Err(perr(ln, format!("exactly 2 focus points supported, got {n_points}")));
    }
    let t_min = parse_f64(ln, toks[4])?;
    let t_max = parse_f64(ln, toks[6])?;
    let mut points = Vec::with_capacity(2);
    for _ in 0..2 {
        let frame = parse_frame(&mut lines)?;
        let chart = parse_chart(&mut lines)?;
        points.push(FamilyPoint { frame, chart });
    }
    if let Some((ln, line)) = lines.peek() {
        return Err(perr(ln, format!("unexpected trailing content `{line}`")));
    }
    Rank1Family::new(t_min, t_max, points).map_err(|e| perr(ln, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn jet_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let order = rng.gen_range(0..=6);
            let mut jet = Jet2::zero(order).unwrap();
            for (p, q) in crate::jet2::monomials(order) {
                if rng.gen_bool(0.7) {
                    jet.set(
                        p,
                        q,
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    );
                }
            }
            let text = write_jet(&jet);
            let back = parse_jet(&text).unwrap();
            assert_eq!(back.order(), jet.order());
            for (p, q, coeff) in jet.iter() {
                assert_eq!(back.coeff(p, q), coeff, "({p},{q})");
            }
        }
    }

    #[test]
    fn jet_round_trip_awkward_values() {
        let jet = Jet2::variable(3)
            .unwrap()
            .with(0, 1, c(0.1, -1e-17))
            .with(2, 1, c(1.0 / 3.0, f64::MIN_POSITIVE))
            .with(3, 0, c(-0.30000000000000004, 1e300));
        let back = parse_jet(&write_jet(&jet)).unwrap();
        for (p, q, coeff) in jet.iter() {
            assert_eq!(back.coeff(p, q), coeff);
        }
    }

    #[test]
    fn jet_parser_rejects_malformed_input() {
        assert!(matches!(parse_jet("bogus 3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_jet("order 2\n1 1 0.5"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_jet("order 2\n2 1 0 0"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_jet("order 99"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_jet("order 2\n\n# comment\n1 0 1 0\n").is_ok());
    }

    #[test]
    fn tuple_round_trip() {
        let phi = DiffeoJet::new(
            Jet2::variable(4)
                .unwrap()
                .scale(c(2.0, 0.0))
                .with(0, 1, c(0.0, 1.0))
                .with(2, 0, c(0.25, -0.5)),
        )
        .unwrap();
        let psi = DiffeoJet::new(Jet2::variable(4).unwrap().with(0, 1, c(0.3, 0.1))).unwrap();
        let tuple = GluingTuple::new(vec![phi, psi]).unwrap();
        let text = write_tuple(&tuple);
        assert!(text.starts_with("n 3 order 4\n"));
        let back = parse_tuple(&text).unwrap();
        assert_eq!(back.pinches(), 3);
        for (a, b) in tuple.maps().iter().zip(back.maps()) {
            assert!(a.jet().sup_distance(b.jet()) == 0.0);
        }
    }

    #[test]
    fn tuple_parser_enforces_counts_and_orders() {
        // Too few blocks.
        assert!(matches!(parse_tuple("n 3 order 2\norder 2\n1 0 1 0\n"), Err(Error::Parse { .. })));
        // Block order disagrees with the header.
        let text = "n 2 order 3\norder 2\n1 0 1 0\n";
        assert!(matches!(parse_tuple(text), Err(Error::Parse { .. })));
        // Degenerate linear part surfaces as a parse-stage failure.
        let text = "n 2 order 2\norder 2\n1 0 1 0\n0 1 1 0\n";
        assert!(matches!(parse_tuple(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn gauge_round_trip() {
        let mk = |a: Complex64| DiffeoJet::new(Jet2::variable(3).unwrap().scale(a)).unwrap();
        let gauge = GaugeTuple::new(vec![mk(c(1.0, 0.5)), mk(c(0.0, 2.0))]).unwrap();
        let back = parse_gauge(&write_gauge(&gauge)).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in gauge.psis().iter().zip(back.psis()) {
            assert!(a.jet().sup_distance(b.jet()) == 0.0);
        }
    }

    #[test]
    fn hessian_round_trip() {
        let h = HessianForm::from_linear_chart(c(1.25, -0.5), c(0.1, 0.7));
        let text = write_hessian(&h);
        assert!(text.starts_with("hessian\n"));
        let back = parse_hessian(&text).unwrap();
        let (a1, a2) = h.components();
        let (b1, b2) = back.components();
        assert_eq!(a1, b1);
        assert_eq!(a2, b2);
    }

    #[test]
    fn hessian_parser_counts_entries() {
        assert!(matches!(parse_hessian("hessian\n1 2 3"), Err(Error::Parse { .. })));
        let too_many = format!("hessian\n{}", "0 ".repeat(33));
        assert!(matches!(parse_hessian(&too_many), Err(Error::Parse { .. })));
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2+0.5i").unwrap(), c(2.0, 0.5));
        assert_eq!(parse_complex("1-0.25i").unwrap(), c(1.0, -0.25));
        assert_eq!(parse_complex("-1.5e-3+2e2i").unwrap(), c(-1.5e-3, 2e2));
        assert_eq!(parse_complex("3").unwrap(), c(3.0, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1+i").unwrap(), c(1.0, 1.0));
        assert!(parse_complex("nonsense+2i").is_err());
        assert!(parse_complex("").is_err());
        for z in [c(0.1, -0.7), c(-3.0, 0.0), c(0.0, 5.5)] {
            assert_eq!(parse_complex(&write_complex(z)).unwrap(), z);
        }
    }

    #[test]
    fn family_round_trip() {
        let mut id = TDependentJet::new(2).unwrap();
        id.set(1, 0, vec![Complex64::ONE]);
        let mut varying = TDependentJet::new(2).unwrap();
        varying.set(1, 0, vec![Complex64::ONE]);
        varying.set(0, 1, vec![c(0.2, 0.0), c(0.5, 0.0)]);
        varying.set(2, 0, vec![c(0.0, 0.1)]);
        let family = Rank1Family::new(
            0.0,
            1.0,
            vec![
                FamilyPoint { frame: Matrix4::identity(), chart: id },
                FamilyPoint { frame: Matrix4::new_scaling(0.5), chart: varying },
            ],
        )
        .unwrap();
        let text = write_family(&family);
        let back = parse_family(&text).unwrap();
        assert_eq!(back.interval(), (0.0, 1.0));
        for (a, b) in family.points().iter().zip(back.points()) {
            assert_eq!(a.frame, b.frame);
            let got: Vec<_> = b.chart.coeff_polys().collect();
            for ((p, q, poly), (bp, bq, bpoly)) in a.chart.coeff_polys().zip(got) {
                assert_eq!((p, q), (bp, bq));
                assert_eq!(poly, bpoly);
            }
        }
    }

    #[test]
    fn family_parser_rejects_malformed_input() {
        assert!(matches!(parse_family("family n_points 3"), Err(Error::Parse { .. })));
        let no_chart = "family n_points 2 t_min 0 t_max 1\n".to_string()
            + &"1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n".repeat(2);
        assert!(matches!(parse_family(&no_chart), Err(Error::Parse { .. })));
        let odd_pairs = "family n_points 2 t_min 0 t_max 1\n\
             1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n1 0 : 1 0 0.5\n\
             1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n1 0 : 1 0\n";
        assert!(matches!(parse_family(odd_pairs), Err(Error::Parse { .. })));
    }
}
