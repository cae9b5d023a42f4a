//! The `measure-spec v1` text format.
//!
//! ```text
//! measure-spec v1
//! # comments and blank lines are ignored
//! support real-line            # real-line | circle | positive-line
//! atom -1 0.5                  # atom <location|inf> <mass>; circle locations are angles
//! atom 1 0.5
//! grid -2 -1 0 1 2             # optional; strictly increasing
//! density 0 0.1 0.2 0.1 0      # required together with grid
//! total_mass 1                 # optional; checked against atoms + density within 1e-10
//! ```
//!
//! [`write_measure`] emits the canonical form: header, support, atoms
//! sorted by location (infinity last), grid, density, total mass, every
//! number in shortest round-trip notation. Reading canonical text and
//! writing it again reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use super::{Atom, AtomPosition, Density, MeasureError, MeasureRep, Support, PROBABILITY_TOL};

pub const HEADER: &str = "measure-spec v1";

fn parse_f64(tok: &str, line: usize) -> Result<f64, MeasureError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| MeasureError::Parse(format!("line {line}: '{tok}' is not a finite number")))
}

pub fn parse_measure(text: &str) -> Result<MeasureRep, MeasureError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, HEADER)) => {}
        Some((n, other)) => {
            return Err(MeasureError::Parse(format!(
                "line {n}: expected header '{HEADER}', found '{other}'"
            )))
        }
        None => return Err(MeasureError::Parse("empty measure spec".into())),
    }
    let mut support = None;
    let mut atoms = Vec::new();
    let mut grid: Option<Vec<f64>> = None;
    let mut density: Option<Vec<f64>> = None;
    let mut declared_mass = None;
    for (n, line) in lines {
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        match key {
            "support" => {
                if support.is_some() {
                    return Err(MeasureError::Parse(format!("line {n}: duplicate support")));
                }
                let s = rest
                    .first()
                    .and_then(|s| Support::parse(s))
                    .filter(|_| rest.len() == 1)
                    .ok_or_else(|| {
                        MeasureError::Parse(format!("line {n}: bad support '{line}'"))
                    })?;
                support = Some(s);
            }
            "atom" => {
                if rest.len() != 2 {
                    return Err(MeasureError::Parse(format!(
                        "line {n}: atom needs location and mass"
                    )));
                }
                let position = if rest[0] == "inf" {
                    AtomPosition::Infinity
                } else {
                    AtomPosition::At(parse_f64(rest[0], n)?)
                };
                atoms.push(Atom {
                    position,
                    mass: parse_f64(rest[1], n)?,
                });
            }
            "grid" | "density" => {
                let vals = rest
                    .iter()
                    .map(|t| parse_f64(t, n))
                    .collect::<Result<Vec<_>, _>>()?;
                let slot = if key == "grid" {
                    &mut grid
                } else {
                    &mut density
                };
                if slot.replace(vals).is_some() {
                    return Err(MeasureError::Parse(format!("line {n}: duplicate {key}")));
                }
            }
            "total_mass" => {
                if rest.len() != 1 {
                    return Err(MeasureError::Parse(format!(
                        "line {n}: total_mass takes one value"
                    )));
                }
                declared_mass = Some(parse_f64(rest[0], n)?);
            }
            other => {
                return Err(MeasureError::Parse(format!(
                    "line {n}: unknown key '{other}'"
                )));
            }
        }
    }
    let support = support.ok_or_else(|| MeasureError::Parse("missing support line".into()))?;
    let density = match (grid, density) {
        (Some(grid), Some(values)) => Some(Density { grid, values }),
        (None, None) => None,
        _ => {
            return Err(MeasureError::Parse(
                "grid and density must appear together".into(),
            ))
        }
    };
    let m = MeasureRep::new(support, atoms, density)?;
    if let Some(dm) = declared_mass {
        if (dm - m.total_mass()).abs() > PROBABILITY_TOL {
            return Err(MeasureError::Invalid(format!(
                "declared total_mass {dm} differs from computed {}",
                m.total_mass()
            )));
        }
    }
    Ok(m)
}

pub fn write_measure(m: &MeasureRep) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "support {}", m.support()).unwrap();
    let mut atoms: Vec<&Atom> = m.atoms().iter().collect();
    atoms.sort_by(|a, b| match (a.position, b.position) {
        (AtomPosition::At(x), AtomPosition::At(y)) => x.total_cmp(&y),
        (AtomPosition::At(_), AtomPosition::Infinity) => std::cmp::Ordering::Less,
        (AtomPosition::Infinity, AtomPosition::At(_)) => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    });
    for a in atoms {
        match a.position {
            AtomPosition::At(x) => writeln!(out, "atom {x:?} {:?}", a.mass).unwrap(),
            AtomPosition::Infinity => writeln!(out, "atom inf {:?}", a.mass).unwrap(),
        }
    }
    if let Some(d) = m.density() {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(out, "grid {}", join(&d.grid)).unwrap();
        writeln!(out, "density {}", join(&d.values)).unwrap();
    }
    writeln!(out, "total_mass {:?}", m.total_mass()).unwrap();
    out
}

pub fn read_measure_file(path: &Path) -> Result<MeasureRep, MeasureError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| MeasureError::Parse(format!("{}: {e}", path.display())))?;
    parse_measure(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BERNOULLI: &str =
        "measure-spec v1\n# symmetric Bernoulli\nsupport real-line\natom 1 0.5\natom -1 0.5\n";

    #[test]
    fn parses_and_canonicalizes() {
        let m = parse_measure(BERNOULLI).unwrap();
        assert_eq!(m.atoms().len(), 2);
        let canon = write_measure(&m);
        assert_eq!(
            canon,
            "measure-spec v1\nsupport real-line\natom -1.0 0.5\natom 1.0 0.5\ntotal_mass 1.0\n"
        );
        assert_eq!(write_measure(&parse_measure(&canon).unwrap()), canon);
    }

    #[test]
    fn density_and_infinity() {
        let text =
            "measure-spec v1\nsupport real-line\natom inf 0.25\ngrid 0 1 2\ndensity 0 0.5 0\n";
        let m = parse_measure(text).unwrap();
        assert_eq!(m.mass_at_infinity(), 0.25);
        assert!((m.total_mass() - 0.75).abs() < 1e-15);
        let canon = write_measure(&m);
        assert!(canon.contains("atom inf 0.25"));
        assert_eq!(write_measure(&parse_measure(&canon).unwrap()), canon);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "measure-spec v2\nsupport real-line\n",
            "measure-spec v1\natom 0 1\n",
            "measure-spec v1\nsupport plane\n",
            "measure-spec v1\nsupport real-line\natom 0\n",
            "measure-spec v1\nsupport real-line\ngrid 0 1\n",
            "measure-spec v1\nsupport real-line\natom 0 1\ntotal_mass 2\n",
            "measure-spec v1\nsupport real-line\nweird 1\n",
            "measure-spec v1\nsupport circle\natom inf 1\n",
            "measure-spec v1\nsupport real-line\natom nan 1\n",
        ] {
            assert!(parse_measure(bad).is_err(), "accepted: {bad:?}");
        }
    }
}
