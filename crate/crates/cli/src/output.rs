//! JSON, CSV and SVG writers.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use chball_core::linalg::CVec;

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String, String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    s.push('\n');
    Ok(s)
}

/// One point per row: `re1,im1,...,word`.
pub fn points_csv(points: &[&CVec], words: &[String]) -> String {
    let m = points.first().map_or(0, |p| p.len());
    let mut s = String::new();
    for j in 1..=m {
        let _ = write!(s, "re{j},im{j},");
    }
    s.push_str("word\n");
    for (p, w) in points.iter().zip(words) {
        for c in p.iter() {
            let _ = write!(s, "{:e},{:e},", c.re, c.im);
        }
        s.push_str(w);
        s.push('\n');
    }
    s
}

/// Real coordinate `k` of a complex vector, ordered `Re z1, Im z1, Re z2, ...`.
fn real_coord(p: &CVec, k: usize) -> f64 {
    let c = p[k / 2];
    if k.is_multiple_of(2) {
        c.re
    } else {
        c.im
    }
}

/// Scatter plot of two real coordinates on `[-1, 1]^2`.
pub fn scatter_svg(points: &[&CVec], proj: (usize, usize)) -> String {
    const SIZE: f64 = 400.0;
    let px = |x: f64| (x + 1.0) * 0.5 * SIZE;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<circle cx="{0}" cy="{0}" r="{0}" fill="none" stroke="gray"/>"#, SIZE / 2.0);
    for p in points {
        let x = px(real_coord(p, proj.0));
        let y = SIZE - px(real_coord(p, proj.1));
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="1.2" fill="black"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use chball_core::C64;

    #[test]
    fn csv_has_header_and_rows() {
        let p = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, -0.5)]);
        let s = points_csv(&[&p], &["g1*g2".into()]);
        assert_eq!(s, "re1,im1,re2,im2,word\n1e0,0e0,0e0,-5e-1,g1*g2\n");
    }

    #[test]
    fn svg_places_points() {
        let p = CVec::from_vec(vec![C64::new(1.0, 0.0)]);
        let s = scatter_svg(&[&p], (0, 1));
        assert!(s.contains(r#"cx="400.000" cy="200.000""#));
    }
}
