//! Writing and reading TGRID files, and the errors malformed files produce.
//!
//! cargo run --example grid_files

use mctopo::grid::{load_grid, read_grid, save_grid, Grid};
use mctopo::phantom::{generate, PhantomSpec};

fn main() -> mctopo::Result<()> {
    let dir = std::env::temp_dir().join("mctopo-grid-example");
    std::fs::create_dir_all(&dir)?;
    let (mask, probs) = generate(&PhantomSpec { height: 32, width: 32, lv_radius: 5.0, my_thickness: 3.0, rv_extent: 6.0, jitter: 1.0, ..Default::default() })?;

    let mask_path = dir.join("mask.tgrid");
    let probs_path = dir.join("probs.tgrid");
    save_grid(&mask.clone().into(), &mask_path)?;
    save_grid(&probs.into(), &probs_path)?;
    println!("{} bytes, {} bytes", std::fs::metadata(&mask_path)?.len(), std::fs::metadata(&probs_path)?.len());

    let back = load_grid(&mask_path)?.into_label()?;
    println!("mask round trip exact: {}", back == mask);
    if let Grid::MultiClass(y) = load_grid(&probs_path)? {
        println!("multiclass grid {}x{}", y.height(), y.width());
    }

    for bad in [
        &b"TGRID v1 prob 1 2 2\n\0\0\0"[..],
        &b"TGRID v1 label 1 1 2\n\x01\x07"[..],
        &b"GRID v1 prob 1 1 1\n\0\0\0\0"[..],
    ] {
        println!("{}", read_grid(bad).unwrap_err());
    }
    Ok(())
}
