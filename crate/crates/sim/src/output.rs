//! CSV and SVG writers.
//!
//! Numbers carry 6 significant digits. Every table has a header row,
//! optionally preceded by a `#` timestamp line.

use std::io::{self, Write};

use ris_core::PhaseProfile;

/// Formats `x` with 6 significant digits, plain notation for exponents in
/// `[-5, 6)` and scientific otherwise. Trailing zeros are dropped.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sig6(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub timestamp: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { timestamp: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    /// Index of the column called `name`.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write<W: Write>(&self, out: W, opts: CsvOptions) -> io::Result<()> {
        let mut out = out;
        if opts.timestamp {
            writeln!(out, "{}", timestamp_line())?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self, opts: CsvOptions) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, opts).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 csv")
    }
}

pub fn timestamp_line() -> String {
    format!(
        "# generated by ris {} at {}",
        env!("CARGO_PKG_VERSION"),
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    )
}

/// Level indices laid out as the board's rows, starting at unit (1, 1).
pub fn codebook_table(levels: &[u32], cols: usize) -> Table {
    let header: Vec<String> = (1..=cols).map(|b| format!("b{b}")).collect();
    let mut t = Table::new(&header);
    for row in levels.chunks(cols) {
        t.push(row.iter().map(|&l| Cell::Int(l as i64)).collect());
    }
    t
}

/// Continuous phases, in degrees, laid out like [`codebook_table`].
pub fn phase_table(profile: &PhaseProfile, cols: usize) -> Table {
    let header: Vec<String> = (1..=cols).map(|b| format!("b{b}")).collect();
    let mut t = Table::new(&header);
    for row in profile.omegas().chunks(cols) {
        t.push(row.iter().map(|w| Cell::Num(w.to_degrees())).collect());
    }
    t
}

/// A named series for [`line_plot_svg`].
pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Minimal line plot of dB curves against angle; values are clamped to
/// `floor_db`.
pub fn line_plot_svg(title: &str, series: &[Series<'_>], floor_db: f64) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, _) in s.points {
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| M + (y.max(floor_db).min(0.0) / floor_db) * (H - 2.0 * M);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
    svg += &format!(
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * M,
        H - 2.0 * M
    );
    for i in 0..=4 {
        let db = floor_db * i as f64 / 4.0;
        svg += &format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            M - 4.0,
            sy(db) + 4.0,
            sig6(db)
        );
    }
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        svg += &format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            sx(x),
            H - M + 16.0,
            sig6(x)
        );
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        svg += &format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        );
        svg += &format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            W - M - 120.0,
            M + 16.0 * (i as f64 + 1.0),
            escape(s.label)
        );
    }
    svg += "</svg>\n";
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
