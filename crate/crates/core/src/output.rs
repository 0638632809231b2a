//! CSV, SVG and PGM emitters.
//!
//! Numbers are written with 17 significant digits in the shortest of fixed
//! or exponent notation (C's `%.17g`), which reads back to the same bits.
//! Infinities are written as `inf` / `-inf`.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::cascade::ScanPoint;
use crate::error::{Error, Result};
use crate::market_map::{MarketState, Orbit};
use crate::sweep::{Regime, SweepCell, SweepGrid};

pub const SVG_WIDTH: f64 = 1024.0;
pub const SVG_HEIGHT: f64 = 768.0;

pub const SWEEP_HEADER: &str = "c,beta_ratio,analytic_regime,empirical_period,lyapunov";
pub const SCAN_HEADER: &str = "gamma,z_sample";
pub const ORBIT_HEADER: &str = "n,x,y";

/// Formats `v` like C's `%.17g`.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();

    if !(-4..17).contains(&exp) {
        let mut m = format!("{}.{}", &digits[..1], &digits[1..]);
        trim_fraction(&mut m);
        let esign = if exp < 0 { '-' } else { '+' };
        return format!("{sign}{m}e{esign}{:02}", exp.abs());
    }
    let mut out = String::from(sign);
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let point = exp as usize + 1;
        out.push_str(&digits[..point]);
        out.push('.');
        out.push_str(&digits[point..]);
    }
    trim_fraction(&mut out);
    out
}

fn trim_fraction(s: &mut String) {
    if s.contains('.') {
        let keep = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(keep);
    }
}

/// Parses a number written by [`fmt_num`].
pub fn parse_num(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("not a number: `{field}`")))
}

pub fn write_sweep_csv<W: Write>(grid: &SweepGrid, mut w: W) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for (c, ratio, cell) in grid.iter() {
        let period = cell.empirical_period.map(|p| p.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_num(c),
            fmt_num(ratio),
            cell.analytic,
            period,
            fmt_num(cell.lyapunov)
        )?;
    }
    Ok(())
}

/// One row per attractor sample.
pub fn write_scan_csv<W: Write>(points: &[ScanPoint], mut w: W) -> io::Result<()> {
    writeln!(w, "{SCAN_HEADER}")?;
    for p in points {
        let gamma = fmt_num(p.gamma);
        for z in &p.summary.samples {
            writeln!(w, "{gamma},{}", fmt_num(*z))?;
        }
    }
    Ok(())
}

pub fn write_orbit_csv<W: Write>(orbit: &Orbit, mut w: W) -> io::Result<()> {
    writeln!(w, "{ORBIT_HEADER}")?;
    for (n, s) in orbit.states.iter().enumerate() {
        writeln!(w, "{n},{},{}", fmt_num(s.x), fmt_num(s.y))?;
    }
    Ok(())
}

fn data_rows<'a>(text: &'a str, header: &str) -> Result<impl Iterator<Item = Vec<&'a str>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == header => {}
        other => {
            return Err(Error::Config(format!(
                "expected header `{header}`, found `{}`",
                other.unwrap_or("")
            )))
        }
    }
    Ok(lines.filter(|l| !l.is_empty()).map(|l| l.split(',').collect()))
}

fn expect_columns(fields: &[&str], n: usize) -> Result<()> {
    if fields.len() == n {
        Ok(())
    } else {
        Err(Error::Config(format!("expected {n} columns, found {}", fields.len())))
    }
}

pub fn parse_sweep_csv(text: &str) -> Result<SweepGrid> {
    let mut c_axis: Vec<f64> = Vec::new();
    let mut ratio_axis: Vec<f64> = Vec::new();
    let mut cells = Vec::new();
    for fields in data_rows(text, SWEEP_HEADER)? {
        expect_columns(&fields, 5)?;
        let c = parse_num(fields[0])?;
        let ratio = parse_num(fields[1])?;
        if ratio_axis.last().is_none_or(|r| r.to_bits() != ratio.to_bits()) {
            ratio_axis.push(ratio);
        }
        if ratio_axis.len() == 1 {
            c_axis.push(c);
        }
        let empirical_period = match fields[3] {
            "" => None,
            p => Some(
                p.parse()
                    .map_err(|_| Error::Config(format!("bad period `{p}`")))?,
            ),
        };
        cells.push(SweepCell {
            analytic: fields[2].parse::<Regime>()?,
            empirical_period,
            lyapunov: parse_num(fields[4])?,
        });
    }
    if cells.len() != c_axis.len() * ratio_axis.len() {
        return Err(Error::Config("sweep rows do not form a full grid".into()));
    }
    Ok(SweepGrid {
        c_axis,
        ratio_axis,
        cells,
    })
}

pub fn parse_scan_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    data_rows(text, SCAN_HEADER)?
        .map(|f| {
            expect_columns(&f, 2)?;
            Ok((parse_num(f[0])?, parse_num(f[1])?))
        })
        .collect()
}

pub fn parse_orbit_csv(text: &str) -> Result<Vec<MarketState>> {
    data_rows(text, ORBIT_HEADER)?
        .map(|f| {
            expect_columns(&f, 3)?;
            Ok(MarketState::new(parse_num(f[1])?, parse_num(f[2])?))
        })
        .collect()
}

/// Data-space rectangle mapped onto the SVG canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl PlotBounds {
    fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("unusable plot bounds {self:?}")))
        }
    }

    /// Canvas position of a data point; `y` grows downward on the canvas.
    pub fn to_canvas(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.x_min) / (self.x_max - self.x_min) * SVG_WIDTH,
            SVG_HEIGHT - (y - self.y_min) / (self.y_max - self.y_min) * SVG_HEIGHT,
        )
    }
}

/// Scatter plot with one small circle per point.
pub fn svg_document(points: &[(f64, f64)], bounds: &PlotBounds) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Config("nothing to plot".into()));
    }
    bounds.validate()?;
    let mut s = String::new();
    let (w, h) = (SVG_WIDTH, SVG_HEIGHT);
    // writing into a String cannot fail
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="0" y1="{h}" x2="{w}" y2="{h}"/><line x1="0" y1="0" x2="0" y2="{h}"/></g>"#
    );
    let _ = writeln!(s, r#"<g font-family="monospace" font-size="12" fill="black">"#);
    let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, h - 4.0, fmt_num(bounds.x_min));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
        w - 4.0,
        h - 4.0,
        fmt_num(bounds.x_max)
    );
    let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, h - 20.0, fmt_num(bounds.y_min));
    let _ = writeln!(s, r#"<text x="4" y="14">{}</text>"#, fmt_num(bounds.y_max));
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g fill="black">"#);
    for &(x, y) in points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        let (cx, cy) = bounds.to_canvas(x, y);
        let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="0.5"/>"#);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

/// Grey level used for each regime in the raster map.
pub fn regime_shade(regime: Regime) -> u8 {
    match regime {
        Regime::StableCoexistence => 255,
        Regime::PriceBoundViolated => 200,
        Regime::PrivateUnstable => 160,
        Regime::StateUnstable => 120,
        Regime::PeriodK(_) => 90,
        Regime::BothUnstable => 60,
        Regime::Chaotic => 30,
        Regime::Divergent => 10,
        Regime::NoPositiveEquilibrium => 0,
    }
}

/// Plain (`P2`) greymap of the analytic regimes, `c` across and the price
/// ratio increasing upward.
pub fn write_pgm<W: Write>(grid: &SweepGrid, mut w: W) -> io::Result<()> {
    let (nc, nr) = (grid.c_axis.len(), grid.ratio_axis.len());
    writeln!(w, "P2")?;
    writeln!(w, "{nc} {nr}")?;
    writeln!(w, "255")?;
    for i_ratio in (0..nr).rev() {
        let mut line = String::new();
        for i_c in 0..nc {
            let v = regime_shade(grid.cell(i_ratio, i_c).analytic).to_string();
            // plain PNM lines stay within 70 characters
            if !line.is_empty() && line.len() + 1 + v.len() > 70 {
                writeln!(w, "{line}")?;
                line.clear();
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(&v);
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}
