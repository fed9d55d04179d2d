//! Barcode of a small hand-made map: a bright ring with a dim interior.
//!
//! cargo run --example barcode

use mctopo::cubical::build_complex;
use mctopo::oracle::brute_barcode;
use mctopo::persistence::compute_barcode;
use mctopo::svg::{render_svg, SvgOptions};
use mctopo::ProbMap;

fn main() -> mctopo::Result<()> {
    let map = ProbMap::from_fn(9, 9, |r, c| {
        let d = (r as i64 - 4).abs().max((c as i64 - 4).abs());
        match d {
            3 => 0.9,
            0 => 0.4,
            _ => 0.1,
        }
    })?;
    let barcode = compute_barcode(&build_complex(&map));

    for p in barcode.pairs() {
        println!(
            "H{} born {:.2} at {:?}, dies {:.2} at {:?} (lifetime {:.2})",
            p.dim,
            p.birth,
            p.birth_vertex,
            p.death,
            p.death_vertex,
            p.lifetime()
        );
    }
    for t in [0.95, 0.5, 0.3, 0.05] {
        println!("p = {t}: b0 = {}, b1 = {}", barcode.betti_at(t, 0), barcode.betti_at(t, 1));
    }

    // The brute-force oracle thresholds the map at every level.
    println!("oracle: {:?}", brute_barcode(&map));

    let mut csv = Vec::new();
    barcode.write_csv(&mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));

    let svg = render_svg(&barcode, &SvgOptions { matched: Some([1, 1]), ..Default::default() });
    println!("svg: {} bytes", svg.len());
    Ok(())
}
