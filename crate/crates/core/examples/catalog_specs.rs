//! Writes the catalog measures as measure-spec files.
//!
//! `cargo run -p dw-core --example catalog_specs -- DIR`

use std::path::PathBuf;

use dw_core::measures::catalog;
use dw_core::measures::spec_file::write_measure;
use dw_core::measures::Support;
use dw_core::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;
    let measures = [
        ("bernoulli", catalog::bernoulli()),
        ("semicircle", catalog::semicircle(1.0, 2001)?),
        ("marchenko-pastur", catalog::marchenko_pastur(1.0, 2001)?),
        ("haar", catalog::haar(401)?),
        (
            "wrapped-cauchy",
            catalog::wrapped_cauchy(Complex64::new(0.5, 0.2), 801)?,
        ),
        (
            "circle-two-point",
            catalog::two_point(Support::Circle, 0.5, 2.0, 0.7)?,
        ),
        (
            "positive-two-point",
            catalog::two_point(Support::PositiveLine, 0.5, 2.0, 0.3)?,
        ),
    ];
    for (name, m) in measures {
        let path = dir.join(format!("{name}.spec"));
        std::fs::write(&path, write_measure(&m))?;
        println!("{}", path.display());
    }
    Ok(())
}
