//! SVG rendering of barcodes.
//!
//! Bars are grouped by dimension and ranked by lifetime. The threshold axis
//! runs from 1 on the left to 0 on the right. Components are drawn solid,
//! loops as outlines. When the prior count per dimension is given, the
//! matched bars are green and the spurious ones red.

use std::fmt::Write;

use crate::persistence::Barcode;

#[derive(Clone, Debug, Default)]
pub struct SvgOptions {
    /// Bars shorter than this are not drawn.
    pub min_lifetime: f64,
    /// Expected number of features per dimension, for matched/spurious colouring.
    pub matched: Option<[u32; 2]>,
    pub title: Option<String>,
}

const WIDTH: f64 = 400.0;
const LEFT: f64 = 40.0;
const ROW: f64 = 14.0;

pub fn render_svg(barcode: &Barcode, opts: &SvgOptions) -> String {
    let x = |p: f64| LEFT + (1.0 - p) * (WIDTH - LEFT - 10.0);
    let mut body = String::new();
    let mut y = 30.0;
    if let Some(t) = &opts.title {
        let _ = writeln!(body, r#"<text x="{LEFT}" y="16" font-size="12">{t}</text>"#);
    }
    for dim in 0..2u8 {
        let _ = writeln!(body, r#"<text x="4" y="{:.1}" font-size="10">d={dim}</text>"#, y + 10.0);
        for (rank, bar) in barcode.dim_pairs(dim).enumerate() {
            if bar.lifetime() < opts.min_lifetime {
                continue;
            }
            let colour = match opts.matched {
                Some(m) if rank < m[dim as usize] as usize => "#2a9d3a",
                Some(_) => "#d1342f",
                None => "#333333",
            };
            let fill = if dim == 0 { colour } else { "none" };
            let _ = writeln!(
                body,
                r#"<rect x="{:.2}" y="{y:.1}" width="{:.2}" height="{:.1}" fill="{fill}" stroke="{colour}"><title>{dim},{}: [{}, {})</title></rect>"#,
                x(bar.birth),
                x(bar.death) - x(bar.birth),
                ROW - 4.0,
                rank + 1,
                bar.birth,
                bar.death
            );
            y += ROW;
        }
        y += ROW;
    }
    let axis = y;
    let _ = writeln!(
        body,
        r#"<line x1="{:.1}" y1="{axis:.1}" x2="{:.1}" y2="{axis:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" font-size="10">1</text><text x="{:.1}" y="{:.1}" font-size="10">0</text>"#,
        x(1.0),
        x(0.0),
        x(1.0) - 3.0,
        axis + 12.0,
        x(0.0) - 3.0,
        axis + 12.0
    );
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{:.0}\">\n{body}</svg>\n",
        axis + 20.0
    )
}
