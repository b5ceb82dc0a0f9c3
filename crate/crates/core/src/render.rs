//! Figure data: CSV point lists and SVG scatter plots with optional box
//! outlines. Output depends only on the inputs, so reruns are byte-identical.

use std::fmt::Write as _;
use std::io;

use crate::embedding::{reduce_dyadic, BoxCover, PointSet, Rect};
use crate::error::{Error, Result};

/// Width and height of the SVG canvas in pixels.
pub const VIEWPORT: u32 = 1024;

/// Square region of the plane shown on the canvas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub y0: f64,
    pub side: f64,
}

impl Window {
    /// `[0, 2]^2`.
    pub fn full() -> Self {
        Window {
            x0: 0.0,
            y0: 0.0,
            side: 2.0,
        }
    }

    pub fn from_rect(r: &Rect) -> Self {
        let x0 = r.x.lo.to_f64();
        let y0 = r.y.lo.to_f64();
        let side = (r.x.hi.to_f64() - x0).max(r.y.hi.to_f64() - y0);
        Window { x0, y0, side }
    }

    fn scale(&self) -> f64 {
        f64::from(VIEWPORT) / self.side
    }

    /// Pixel holding `(x, y)`, if it lies in the window.
    fn pixel(&self, x: f64, y: f64) -> Option<(u32, u32)> {
        let u = (x - self.x0) * self.scale();
        let v = (y - self.y0) * self.scale();
        let lim = f64::from(VIEWPORT);
        if !(0.0..=lim).contains(&u) || !(0.0..=lim).contains(&v) {
            return None;
        }
        let px = (u.floor() as u32).min(VIEWPORT - 1);
        let py = VIEWPORT - 1 - (v.floor() as u32).min(VIEWPORT - 1);
        Some((px, py))
    }
}

/// Writes `n,x_num,x_exp,y_num,y_exp` rows with reduced dyadic coordinates.
pub fn write_points_csv<W: io::Write>(set: &PointSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["n", "x_num", "x_exp", "y_num", "y_exp"])
        .map_err(io_err)?;
    for n in 0..set.len() {
        let (x, y) = set.raw(n);
        let (xn, xe) = reduce_dyadic(x, set.exp());
        let (yn, ye) = reduce_dyadic(y, set.exp());
        w.write_record(&[
            n.to_string(),
            xn.to_string(),
            xe.to_string(),
            yn.to_string(),
            ye.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Scatter plot of `set` inside `window`: one 1-pixel rectangle per occupied
/// pixel in ascending parameter order, y axis pointing up. Boxes are drawn
/// as unfilled outlines.
pub fn render_svg(set: &PointSet, window: &Window, boxes: Option<&BoxCover>) -> String {
    let n = VIEWPORT;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{n}" height="{n}" viewBox="0 0 {n} {n}">"#
    );
    let _ = writeln!(s, r#"<rect width="{n}" height="{n}" fill="white"/>"#);
    if let Some(b) = boxes {
        let _ = writeln!(
            s,
            r#"<g fill="none" stroke="steelblue" stroke-width="0.5">"#
        );
        let side = b.side().to_f64();
        let w = side * window.scale();
        for i in 0..b.boxes.len() {
            let (x0, y0) = b.corner(i);
            let px = (x0.to_f64() - window.x0) * window.scale();
            let py = f64::from(n) - (y0.to_f64() + side - window.y0) * window.scale();
            let _ = writeln!(
                s,
                r#"<rect x="{px:.4}" y="{py:.4}" width="{w:.4}" height="{w:.4}"/>"#
            );
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, r#"<g fill="black">"#);
    let mut seen = vec![false; (n * n) as usize];
    for i in 0..set.len() {
        let (x, y) = set.point_f64(i);
        if let Some((px, py)) = window.pixel(x, y) {
            let slot = &mut seen[(py * n + px) as usize];
            if !*slot {
                *slot = true;
                let _ = writeln!(s, r#"<rect x="{px}" y="{py}" width="1" height="1"/>"#);
            }
        }
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{box_cover, generate_set, square_pair};

    #[test]
    fn csv_rows() {
        let set = generate_set(3).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&set, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,x_num,x_exp,y_num,y_exp");
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[1], "0,0,0,0,0");
        // n = 1: X = 1, Q(1) mod 8 = 0b101, Y = 1 + 1/4 = 5/4.
        assert_eq!(lines[2], "1,1,0,5,2");
    }

    #[test]
    fn svg_is_deterministic() {
        let set = generate_set(8).unwrap();
        let boxes = box_cover(4).unwrap();
        let a = render_svg(&set, &Window::full(), Some(&boxes));
        let b = render_svg(&set, &Window::full(), Some(&boxes));
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert_eq!(a.matches(r#"fill="none""#).count(), 1);
        assert_eq!(a.matches("<rect").count(), 1 + 16 + 256);
    }

    #[test]
    fn y_axis_points_up() {
        let w = Window::full();
        assert_eq!(w.pixel(0.0, 0.0), Some((0, 1023)));
        assert_eq!(w.pixel(2.0, 2.0), Some((1023, 0)));
        assert_eq!(w.pixel(2.5, 0.0), None);
    }

    #[test]
    fn square_window() {
        let sp = square_pair(2).unwrap();
        let w = Window::from_rect(&sp.box1);
        assert_eq!((w.x0, w.y0, w.side), (0.5, 0.5, 0.5));
    }
}
