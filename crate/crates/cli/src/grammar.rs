//! Command-line mini-grammar.
//!
//! Complex numbers: `1.5`, `-2i`, `i`, `0.5+0.3i`, `1e-3-2e-2i`, `inf`.
//! Lists are comma separated. Real ranges are `lo:hi:step` (both ends
//! included when `hi - lo` is a multiple of `step`) or a single number.
//!
//! Maps:
//!
//! | spec | map |
//! |------|-----|
//! | `const:W` | constant `W` (`inf` allowed on the half-plane) |
//! | `affine:A,B` | `A z + B` |
//! | `moebius:A,B,C,D` | `(A z + B)/(C z + D)` |
//! | `poly:C0,C1,...` | `C0 + C1 z + ...` |
//! | `f-shift:PATH` | `F_mu(z) - z` for a real-line measure file |
//! | `eta-ratio:PATH` | `eta_mu(z)/z` for a circle or positive-line measure file |
//! | `nevanlinna:ALPHA,BETA,PATH` | `ALPHA z + BETA + int (1 + t z)/(t - z) dsigma` |
//!
//! The literal kinds live on the domain given by `--domain`; the measure
//! kinds fix their own domain.

use std::path::Path;

use dw_core::domains::{DomainTag, SpherePoint};
use dw_core::measures::spec_file::parse_measure;
use dw_core::measures::{MeasureRep, NevanlinnaData};
use dw_core::numerics::linspace_step;
use dw_core::selfmaps::SelfMap;
use dw_core::Complex64;

/// Failure classes, each with its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn validation(e: impl ToString) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn number(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Validation(format!("'{s}' is not a finite number")))
}

pub fn parse_complex(s: &str) -> Result<SpherePoint, CliError> {
    let t = s.trim();
    if t == "inf" {
        return Ok(SpherePoint::Infinity);
    }
    let bad = || CliError::Validation(format!("'{s}' is not a complex number"));
    let Some(body) = t.strip_suffix('i') else {
        return Ok(SpherePoint::Finite(Complex64::new(number(t)?, 0.0)));
    };
    // split at the last sign that is not the leading one or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (number(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => number(other).map_err(|_| bad())?,
    };
    Ok(SpherePoint::Finite(Complex64::new(re, im)))
}

pub fn parse_finite(s: &str) -> Result<Complex64, CliError> {
    parse_complex(s)?
        .as_finite()
        .ok_or_else(|| CliError::Validation(format!("'{s}' must be finite")))
}

pub fn parse_points(s: &str) -> Result<Vec<SpherePoint>, CliError> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(number).collect()
}

pub fn parse_counts(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| CliError::Validation(format!("'{t}' is not a positive integer")))
        })
        .collect()
}

pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [x] => Ok(vec![number(x)?]),
        [lo, hi, step] => {
            let (lo, hi, step) = (number(lo)?, number(hi)?, number(step)?);
            if !(step > 0.0) || hi < lo {
                return Err(CliError::Validation(format!(
                    "range '{s}' needs lo <= hi and step > 0"
                )));
            }
            if (hi - lo) / step > 1e7 {
                return Err(CliError::Validation(format!(
                    "range '{s}' has too many points"
                )));
            }
            Ok(linspace_step(lo, hi, step))
        }
        _ => Err(CliError::Validation(format!(
            "range '{s}' is not lo:hi:step"
        ))),
    }
}

pub fn parse_domain(s: &str) -> Result<DomainTag, CliError> {
    match s {
        "disk" => Ok(DomainTag::Disk),
        "half-plane" => Ok(DomainTag::HalfPlane),
        _ => Err(CliError::Validation(format!(
            "unknown domain '{s}' (disk | half-plane)"
        ))),
    }
}

pub fn read_measure(path: &Path) -> Result<MeasureRep, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_measure(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn parse_map(spec: &str, domain: DomainTag) -> Result<SelfMap, CliError> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Validation(format!("map '{spec}' is not KIND:ARGS")))?;
    let finite = |n: usize| -> Result<Vec<Complex64>, CliError> {
        let v: Vec<Complex64> = args
            .split(',')
            .map(parse_finite)
            .collect::<Result<_, _>>()?;
        if n > 0 && v.len() != n {
            return Err(CliError::Validation(format!(
                "{kind} takes {n} numbers, got {}",
                v.len()
            )));
        }
        Ok(v)
    };
    let m = match kind {
        "const" => SelfMap::constant(domain, parse_complex(args)?),
        "affine" => {
            let v = finite(2)?;
            SelfMap::affine(domain, v[0], v[1])
        }
        "moebius" => {
            let v = finite(4)?;
            SelfMap::moebius(domain, v[0], v[1], v[2], v[3])
        }
        "poly" => SelfMap::polynomial(domain, finite(0)?),
        "f-shift" => SelfMap::f_shift(read_measure(Path::new(args))?),
        "eta-ratio" => SelfMap::eta_ratio_measure(read_measure(Path::new(args))?),
        "nevanlinna" => {
            let mut it = args.splitn(3, ',');
            let (Some(a), Some(b), Some(path)) = (it.next(), it.next(), it.next()) else {
                return Err(CliError::Validation(
                    "nevanlinna takes ALPHA,BETA,PATH".into(),
                ));
            };
            let data = NevanlinnaData::new(number(a)?, number(b)?, read_measure(Path::new(path))?)
                .map_err(CliError::validation)?;
            Ok(SelfMap::nevanlinna(data))
        }
        _ => return Err(CliError::Validation(format!("unknown map kind '{kind}'"))),
    };
    m.map_err(CliError::validation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> SpherePoint {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), z(1.5, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), z(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), z(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), z(0.0, -1.0));
        assert_eq!(parse_complex("0.5+0.3i").unwrap(), z(0.5, 0.3));
        assert_eq!(parse_complex("1e-3-2e-2i").unwrap(), z(1e-3, -2e-2));
        assert_eq!(parse_complex("-1-i").unwrap(), z(-1.0, -1.0));
        assert_eq!(parse_complex("inf").unwrap(), SpherePoint::Infinity);
        for bad in ["", "x", "1+", "nan", "1+2j", "2ii"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ranges_and_lists() {
        assert_eq!(
            parse_range("-1:1:0.5").unwrap(),
            vec![-1.0, -0.5, 0.0, 0.5, 1.0]
        );
        assert_eq!(parse_range("3").unwrap(), vec![3.0]);
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1").is_err());
        assert_eq!(parse_counts("1,10,100").unwrap(), vec![1, 10, 100]);
        assert!(parse_counts("0").is_err());
        assert_eq!(parse_reals("1e-2,3e-3").unwrap(), vec![1e-2, 3e-3]);
    }

    #[test]
    fn map_specs() {
        let sq = parse_map("poly:0,0,1", DomainTag::Disk).unwrap();
        assert_eq!(
            sq.eval(Complex64::new(0.0, 0.5)).unwrap(),
            Complex64::new(-0.25, 0.0)
        );
        let aff = parse_map("affine:0.5,0.5", DomainTag::Disk).unwrap();
        assert_eq!(
            aff.eval(Complex64::new(1.0, 0.0)).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert!(parse_map("const:inf", DomainTag::HalfPlane).is_ok());
        assert!(parse_map("affine:2,0", DomainTag::Disk).is_err());
        assert!(parse_map("affine:1", DomainTag::Disk).is_err());
        assert!(parse_map("sin:1", DomainTag::Disk).is_err());
        assert!(matches!(
            parse_map("f-shift:/nonexistent/x.spec", DomainTag::HalfPlane),
            Err(CliError::Io(_))
        ));
    }
}
