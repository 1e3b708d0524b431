//! Text serialisation of fields.
//!
//! ```text
//! spectral-field 1
//! lattice <n> <ℓ₁> <ℓ₂> <ℓ₃>
//! modes <count>
//! <k₁> <k₂> <k₃> <Re û₁> <Im û₁> <Re û₂> <Im û₂> <Re û₃> <Im û₃>
//! ...
//! end
//! ```
//!
//! Only half-space modes with a nonzero coefficient are listed; the
//! conjugate modes are implied by realness. Numbers are written with 17
//! significant digits, so a write/read cycle is bit-exact. A complex field is
//! written as `complex-field 1` followed by `re` and `im` blocks in the format
//! above.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::{ComplexField, Mode, SpectralField};
use crate::spectral::lattice::{in_half_space, Lattice};
use crate::textio::{fmt_f64, Lines};

pub fn write_field(out: &mut impl Write, field: &SpectralField) -> std::io::Result<()> {
    let lat = field.lattice();
    let [l1, l2, l3] = lat.lengths();
    writeln!(out, "spectral-field 1")?;
    writeln!(out, "lattice {} {} {} {}", lat.resolution(), fmt_f64(l1), fmt_f64(l2), fmt_f64(l3))?;
    let nonzero: Vec<usize> = (0..lat.len())
        .filter(|&i| field.coefficients()[i].iter().any(|c| c.re != 0.0 || c.im != 0.0))
        .collect();
    writeln!(out, "modes {}", nonzero.len())?;
    for i in nonzero {
        let k = lat.modes()[i];
        let m = field.coefficients()[i];
        write!(out, "{} {} {}", k[0], k[1], k[2])?;
        for c in m {
            write!(out, " {} {}", fmt_f64(c.re), fmt_f64(c.im))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "end")
}

pub fn write_complex_field(out: &mut impl Write, field: &ComplexField) -> std::io::Result<()> {
    writeln!(out, "complex-field 1")?;
    writeln!(out, "re")?;
    write_field(out, field.re())?;
    writeln!(out, "im")?;
    write_field(out, field.im())
}

pub(crate) fn read_field_from(lines: &mut Lines<'_>, reuse: Option<&Arc<Lattice>>) -> Result<SpectralField> {
    let version = lines.expect("spectral-field")?;
    if version != ["1"] {
        return Err(lines.error("unsupported spectral-field version"));
    }
    let header = lines.expect("lattice")?;
    if header.len() != 4 {
        return Err(lines.error("lattice line needs resolution and three box lengths"));
    }
    let n: usize = lines.parse(header[0])?;
    let lengths = [lines.parse(header[1])?, lines.parse(header[2])?, lines.parse(header[3])?];
    let lattice = match reuse {
        Some(l) if l.resolution() == n && l.lengths() == lengths => l.clone(),
        _ => Lattice::with_box(n, lengths).map_err(|e| lines.error(e.to_string()))?,
    };
    let count_tok = lines.expect("modes")?;
    let count: usize = lines.parse(count_tok.first().copied().unwrap_or(""))?;
    let mut coeffs = vec![[Complex64::default(); 3]; lattice.len()];
    for _ in 0..count {
        let t = lines.next_tokens()?;
        if t.len() != 9 {
            return Err(lines.error("mode line needs 3 integers and 6 reals"));
        }
        let k = [lines.parse(t[0])?, lines.parse(t[1])?, lines.parse(t[2])?];
        if !in_half_space(k) {
            return Err(lines.error(format!("mode {k:?} is not in the stored half space")));
        }
        let (i, _) = lattice.locate(k).ok_or_else(|| lines.error(format!("mode {k:?} exceeds the lattice cutoff")))?;
        let mut m: Mode = [Complex64::default(); 3];
        for (d, c) in m.iter_mut().enumerate() {
            *c = Complex64::new(lines.parse(t[3 + 2 * d])?, lines.parse(t[4 + 2 * d])?);
        }
        coeffs[i] = m;
    }
    lines.expect("end")?;
    SpectralField::from_half_space(&lattice, coeffs).map_err(|e| lines.error(e.to_string()))
}

pub(crate) fn read_complex_field_from(lines: &mut Lines<'_>, reuse: Option<&Arc<Lattice>>) -> Result<ComplexField> {
    let version = lines.expect("complex-field")?;
    if version != ["1"] {
        return Err(lines.error("unsupported complex-field version"));
    }
    lines.expect("re")?;
    let re = read_field_from(lines, reuse)?;
    lines.expect("im")?;
    let im = read_field_from(lines, Some(re.lattice()))?;
    ComplexField::new(re, im)
}

pub fn parse_field(text: &str) -> Result<SpectralField> {
    read_field_from(&mut Lines::new(text), None)
}

pub fn parse_complex_field(text: &str) -> Result<ComplexField> {
    read_complex_field_from(&mut Lines::new(text), None)
}

pub fn save_field(path: &Path, field: &SpectralField) -> Result<()> {
    let mut buf = Vec::new();
    write_field(&mut buf, field).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_field(path: &Path) -> Result<SpectralField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field(&text)
}

pub fn save_complex_field(path: &Path, field: &ComplexField) -> Result<()> {
    let mut buf = Vec::new();
    write_complex_field(&mut buf, field).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_complex_field(path: &Path) -> Result<ComplexField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_complex_field(&text)
}
