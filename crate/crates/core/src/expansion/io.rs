//! Text serialisation of expansions.
//!
//! ```text
//! expansion 1
//! depth <k>
//! class <m> <μ>
//! lattice <n> <ℓ₁> <ℓ₂> <ℓ₃>
//! terms <count>
//! term
//! re <Re α_{-1}> … <Re α_k>
//! im <Im α_{-1}> … <Im α_k>
//! coefficient inline
//! <complex-field block>
//! term
//! …
//! coefficient file <relative path>
//! end
//! ```
//!
//! Real parts are exact rationals (`3`, `-1/2`); imaginary parts and field
//! values are decimal with 17 significant digits. A `coefficient file` path is
//! resolved against the directory of the expansion file.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::expansion::exponent::ExponentVector;
use crate::expansion::series::{Expansion, Term};
use crate::spectral::io::{read_complex_field_from, save_complex_field, write_complex_field};
use crate::spectral::Lattice;
use crate::textio::{fmt_f64, Lines};

/// Where coefficient fields are written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientStorage {
    Inline,
    /// One `<stem>.term<i>.field` file per term, next to the expansion file.
    Separate,
}

fn write_header(out: &mut impl Write, p: &Expansion) -> std::io::Result<()> {
    let lat = p.lattice();
    let [l1, l2, l3] = lat.lengths();
    writeln!(out, "expansion 1")?;
    writeln!(out, "depth {}", p.depth())?;
    writeln!(out, "class {} {}", p.class_m(), p.class_mu())?;
    writeln!(out, "lattice {} {} {} {}", lat.resolution(), fmt_f64(l1), fmt_f64(l2), fmt_f64(l3))?;
    writeln!(out, "terms {}", p.len())
}

fn write_exponent(out: &mut impl Write, e: &ExponentVector) -> std::io::Result<()> {
    let re: Vec<String> = e.re_parts().iter().map(|r| r.to_string()).collect();
    let im: Vec<String> = e.im_parts().iter().map(|&b| fmt_f64(b)).collect();
    writeln!(out, "term")?;
    writeln!(out, "re {}", re.join(" "))?;
    writeln!(out, "im {}", im.join(" "))
}

/// Writes `p` with every coefficient inline.
pub fn write_expansion(out: &mut impl Write, p: &Expansion) -> std::io::Result<()> {
    write_header(out, p)?;
    for t in p.terms() {
        write_exponent(out, &t.exponent)?;
        writeln!(out, "coefficient inline")?;
        write_complex_field(out, &t.coefficient)?;
    }
    writeln!(out, "end")
}

pub fn save_expansion(path: &Path, p: &Expansion, storage: CoefficientStorage) -> Result<()> {
    let mut buf = Vec::new();
    let io = |e| Error::io(path, e);
    match storage {
        CoefficientStorage::Inline => write_expansion(&mut buf, p).map_err(io)?,
        CoefficientStorage::Separate => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("expansion");
            let dir = path.parent().unwrap_or(Path::new(""));
            write_header(&mut buf, p).map_err(io)?;
            for (i, t) in p.terms().iter().enumerate() {
                let name = format!("{stem}.term{i}.field");
                save_complex_field(&dir.join(&name), &t.coefficient)?;
                write_exponent(&mut buf, &t.exponent).map_err(io)?;
                writeln!(buf, "coefficient file {name}").map_err(io)?;
            }
            writeln!(buf, "end").map_err(io)?;
        }
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Parses an expansion; `base_dir` resolves `coefficient file` references.
pub fn parse_expansion(text: &str, base_dir: Option<&Path>) -> Result<Expansion> {
    let mut lines = Lines::new(text);
    if lines.expect("expansion")? != ["1"] {
        return Err(lines.error("unsupported expansion version"));
    }
    let tokens = lines.expect("depth")?;
    let k: i32 = lines.parse(single(&lines, tokens)?)?;
    let class = lines.expect("class")?;
    if class.len() != 2 {
        return Err(lines.error("class line needs m and μ"));
    }
    let m: i32 = lines.parse(class[0])?;
    let mu: Rational64 = lines.parse(class[1])?;
    let header = lines.expect("lattice")?;
    if header.len() != 4 {
        return Err(lines.error("lattice line needs resolution and three box lengths"));
    }
    let n: usize = lines.parse(header[0])?;
    let lengths = [lines.parse(header[1])?, lines.parse(header[2])?, lines.parse(header[3])?];
    let lattice = Lattice::with_box(n, lengths).map_err(|e| lines.error(e.to_string()))?;
    let tokens = lines.expect("terms")?;
    let count: usize = lines.parse(single(&lines, tokens)?)?;
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        lines.expect("term")?;
        let re_tok = lines.expect("re")?;
        let re: Vec<Rational64> = re_tok.iter().map(|s| lines.parse(s)).collect::<Result<_>>()?;
        let im_tok = lines.expect("im")?;
        let im: Vec<f64> = im_tok.iter().map(|s| lines.parse(s)).collect::<Result<_>>()?;
        let exponent = ExponentVector::new(re, im).map_err(|e| lines.error(e.to_string()))?;
        let how = lines.expect("coefficient")?;
        let coefficient = match how.as_slice() {
            ["inline"] => read_complex_field_from(&mut lines, Some(&lattice))?,
            ["file", name] => {
                let path: PathBuf = base_dir.unwrap_or(Path::new("")).join(name);
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                read_complex_field_from(&mut Lines::new(&text), Some(&lattice))?
            }
            _ => return Err(lines.error("expected `coefficient inline` or `coefficient file <path>`")),
        };
        if !coefficient.lattice().same_as(&lattice) {
            return Err(lines.error("coefficient lattice differs from the expansion header"));
        }
        terms.push(Term::new(exponent, coefficient));
    }
    lines.expect("end")?;
    let line = lines.line();
    Expansion::new(&lattice, k, m, mu, terms).map_err(|e| Error::parse(line, e.to_string()))
}

fn single<'a>(lines: &Lines<'_>, tokens: Vec<&'a str>) -> Result<&'a str> {
    match tokens.as_slice() {
        [one] => Ok(one),
        _ => Err(lines.error("expected a single value")),
    }
}

pub fn load_expansion(path: &Path) -> Result<Expansion> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_expansion(&text, path.parent())
}

/// Shares one lattice between a list of loaded expansions, when equal.
pub fn lattice_of(list: &[Expansion]) -> Option<Arc<Lattice>> {
    let first = list.first()?.lattice().clone();
    list.iter().all(|p| p.lattice().same_as(&first)).then_some(first)
}
