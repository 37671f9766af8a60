//! CSV and SVG emission, grid specs and curve files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use contactflow_core::legendre::{LegendreCurve, LegendrePoint, Polyline};
use contactflow_core::numeric::linspace;
use contactflow_core::{Convention, ModelParams};

use crate::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Accumulates CSV text; every row must have the header's column count.
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { columns: header.len(), text }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            self.text.push_str(c.as_ref());
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `start:stop:n` (inclusive, `n` points) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("bad grid {spec:?}: {why}"));
    let float = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number")).and_then(|v| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("values must be finite"))
        }
    });
    let grid = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad("expected start:stop:n"));
        };
        let n: usize = n.trim().parse().map_err(|_| bad("point count must be a positive integer"))?;
        if n == 0 {
            return Err(bad("point count must be a positive integer"));
        }
        let (a, b) = (float(a)?, float(b)?);
        if n == 1 {
            vec![a]
        } else {
            linspace(a, b, n)
        }
    } else {
        spec.split(',').map(float).collect::<Result<Vec<_>, _>>()?
    };
    if grid.is_empty() {
        return Err(bad("empty grid"));
    }
    Ok(grid)
}

pub fn parse_sizes(spec: &str) -> Result<Vec<u64>, CliError> {
    spec.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| CliError::Usage(format!("bad system size {s:?}"))))
        .collect()
}

pub const CURVE_HEADER: [&str; 5] = ["x", "y", "z", "j0bar", "convention"];

pub fn curve_csv(curve: &LegendreCurve) -> String {
    let mut csv = Csv::new(&CURVE_HEADER);
    let j = num(curve.params.j0bar());
    for p in &curve.samples {
        csv.row(&[num(p.x), num(p.y), num(p.z), j.clone(), curve.convention.as_str().to_string()]);
    }
    csv.into_string()
}

/// Reads a file written by `curve`. Parameters and convention must agree on every row.
pub fn read_curve(path: &Path) -> Result<LegendreCurve, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |line: usize, why: &str| CliError::Usage(format!("{}:{line}: {why}", path.display()));
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_HEADER.join(",").as_str()) {
        return Err(bad(1, "not a curve file (header mismatch)"));
    }
    let mut samples = Vec::new();
    let mut meta: Option<(String, String)> = None;
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(bad(n, "expected 5 columns"));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|_| bad(n, "not a number"));
        samples.push(LegendrePoint { x: f(cells[0])?, y: f(cells[1])?, z: f(cells[2])? });
        match &meta {
            None => meta = Some((cells[3].to_string(), cells[4].to_string())),
            Some((j, c)) if j == cells[3] && c == cells[4] => {}
            Some(_) => return Err(bad(n, "j0bar or convention changes within the file")),
        }
    }
    let (j, c) = meta.ok_or_else(|| bad(2, "no samples"))?;
    let j0bar = j.parse::<f64>().map_err(|_| bad(2, "bad j0bar"))?;
    let params = ModelParams::new(j0bar)?;
    let convention: Convention = c.parse()?;
    Ok(LegendreCurve { params, samples, convention })
}

/// Projected polylines as CSV, one row per vertex.
pub fn polylines_csv(lines: &[Polyline], axes: (&str, &str)) -> String {
    let mut csv = Csv::new(&["polyline", "mu", "domain", "stability", axes.0, axes.1]);
    for (k, line) in lines.iter().enumerate() {
        let (mu, domain, role) = match line.branch {
            Some((mu, d, r)) => (mu.to_string(), d.as_str().to_string(), r.as_str().to_string()),
            None => (String::new(), String::new(), String::new()),
        };
        for p in &line.points {
            csv.row(&[k.to_string(), mu.clone(), domain.clone(), role.clone(), num(p[0]), num(p[1])]);
        }
    }
    csv.into_string()
}

/// Polylines only, viewBox fitted to the data with a 2% margin, `y` axis up.
pub fn polylines_svg(lines: &[Vec<[f64; 2]>]) -> String {
    let pts = lines.iter().flatten().filter(|p| p[0].is_finite() && p[1].is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let w = (x1 - x0).max(1e-12);
    let h = (y1 - y0).max(1e-12);
    let (mx, my) = (0.02 * w, 0.02 * h);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" preserveAspectRatio=\"none\">",
        x0 - mx,
        -(y1 + my),
        w + 2.0 * mx,
        h + 2.0 * my
    );
    for line in lines {
        let coords: Vec<String> = line
            .iter()
            .filter(|p| p[0].is_finite() && p[1].is_finite())
            .map(|p| format!("{},{}", p[0], -p[1]))
            .collect();
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" vector-effect=\"non-scaling-stroke\" points=\"{}\"/>",
            coords.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
