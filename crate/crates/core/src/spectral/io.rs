//! Versioned columnar text format for spectral bases.
//!
//! ```text
//! #qsdlab-basis/1
//! kind <closed-form|finite-difference|tensor>
//! domain <interval L | box d L_1 .. L_d>
//! potential <label>
//! axes <n_1> .. <n_d>
//! modes <K>
//! #eigenvalues k lambda
//! ...K rows...
//! #axis j: node weight
//! ...n_j rows per axis...
//! #values i u phi_0 .. phi_{K-1}
//! ...N rows...
//! #ratios i r_0 .. r_{K-1}
//! ...N rows...
//! ```
//!
//! Doubles are written with 17 significant digits so a read/write cycle is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::basis::{BasisKind, SpectralBasis};
use super::{Axis, Domain, Grid};

pub const BASIS_FORMAT: &str = "#qsdlab-basis/1";

fn num(out: &mut String, x: f64) {
    let _ = write!(out, " {x:.16e}");
}

pub(crate) fn render_basis(b: &SpectralBasis) -> String {
    let mut s = String::new();
    let k = b.len();
    let _ = writeln!(s, "{BASIS_FORMAT}");
    let _ = writeln!(s, "kind {}", b.kind().tag());
    let _ = writeln!(s, "domain {}", b.domain().describe());
    let _ = writeln!(s, "potential {}", b.potential_label());
    let axes: Vec<String> = b.grid().axes().iter().map(|a| a.len().to_string()).collect();
    let _ = writeln!(s, "axes {}", axes.join(" "));
    let _ = writeln!(s, "modes {k}");
    let _ = writeln!(s, "#eigenvalues k lambda");
    for (i, l) in b.lambdas().iter().enumerate() {
        let _ = write!(s, "{i}");
        num(&mut s, *l);
        s.push('\n');
    }
    for (j, axis) in b.grid().axes().iter().enumerate() {
        let _ = writeln!(s, "#axis {j}: node weight");
        for (x, w) in axis.nodes.iter().zip(&axis.weights) {
            let _ = write!(s, "{x:.16e}");
            num(&mut s, *w);
            s.push('\n');
        }
    }
    let _ = writeln!(s, "#values i u phi_0..phi_{}", k - 1);
    for i in 0..b.grid().len() {
        let _ = write!(s, "{i}");
        num(&mut s, b.u_values()[i]);
        for m in 0..k {
            num(&mut s, b.phi(m)[i]);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "#ratios i r_0..r_{}", k - 1);
    for i in 0..b.grid().len() {
        let _ = write!(s, "{i}");
        for m in 0..k {
            num(&mut s, b.ratio(m)[i]);
        }
        s.push('\n');
    }
    s
}

pub fn write_basis(b: &SpectralBasis, path: &Path) -> Result<()> {
    fs::write(path, render_basis(b))?;
    Ok(())
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    path: &'a Path,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Load {
            path: self.path.to_path_buf(),
            message: format!("line {}: {}", self.line, message.into()),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected `{key}`")))
    }

    fn comment(&mut self) -> Result<()> {
        let line = self.next()?;
        if line.starts_with('#') {
            Ok(())
        } else {
            Err(self.err("expected section header"))
        }
    }

    fn numbers(&mut self, expect: usize) -> Result<Vec<f64>> {
        let line = self.next()?;
        let vals: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|e| self.err(format!("bad number: {e}")))?;
        if vals.len() != expect {
            return Err(self.err(format!("expected {expect} columns, found {}", vals.len())));
        }
        Ok(vals)
    }
}

fn parse_usize(lines: &Lines<'_>, s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| lines.err(format!("bad integer `{s}`")))
}

fn parse_floats(lines: &Lines<'_>, v: &[&str]) -> Result<Vec<f64>> {
    v.iter()
        .map(|s| s.parse::<f64>().map_err(|_| lines.err(format!("bad length `{s}`"))))
        .collect()
}

pub(crate) fn parse_basis(text: &str, path: &Path) -> Result<SpectralBasis> {
    let mut lines = Lines { inner: text.lines().enumerate(), path, line: 0 };
    if lines.next()? != BASIS_FORMAT {
        return Err(lines.err(format!("missing `{BASIS_FORMAT}` header")));
    }
    let kind_tag = lines.keyed("kind")?;
    let kind = BasisKind::from_tag(kind_tag).ok_or_else(|| lines.err(format!("unknown kind `{kind_tag}`")))?;
    let dom = lines.keyed("domain")?;
    let parts: Vec<&str> = dom.split_whitespace().collect();
    let domain = match parts.first() {
        Some(&"interval") if parts.len() == 2 => Domain::interval(parse_floats(&lines, &parts[1..])?[0])?,
        Some(&"box") if parts.len() >= 3 => {
            let d = parse_usize(&lines, parts[1])?;
            let lengths = parse_floats(&lines, &parts[2..])?;
            if lengths.len() != d {
                return Err(lines.err("box dimension does not match side count"));
            }
            Domain::cube(lengths)?
        }
        _ => return Err(lines.err(format!("bad domain `{dom}`"))),
    };
    let potential = lines.keyed("potential")?.to_string();
    let axes_line = lines.keyed("axes")?;
    let counts: Vec<usize> = axes_line
        .split_whitespace()
        .map(|s| parse_usize(&lines, s))
        .collect::<Result<_>>()?;
    if counts.len() != domain.dim() {
        return Err(lines.err("axis count does not match domain dimension"));
    }
    let modes = lines.keyed("modes")?;
    let k = parse_usize(&lines, modes)?;
    if k == 0 {
        return Err(lines.err("basis has no modes"));
    }
    lines.comment()?;
    let mut lambdas = Vec::with_capacity(k);
    for m in 0..k {
        let row = lines.numbers(2)?;
        if row[0] as usize != m {
            return Err(lines.err("eigenvalue rows out of order"));
        }
        lambdas.push(row[1]);
    }
    let mut axes = Vec::with_capacity(counts.len());
    for n in &counts {
        lines.comment()?;
        let mut nodes = Vec::with_capacity(*n);
        let mut weights = Vec::with_capacity(*n);
        for _ in 0..*n {
            let row = lines.numbers(2)?;
            nodes.push(row[0]);
            weights.push(row[1]);
        }
        axes.push(Axis { nodes, weights });
    }
    let grid = Grid::from_axes(axes);
    let npts = grid.len();
    lines.comment()?;
    let mut u = Vec::with_capacity(npts);
    let mut values = vec![Vec::with_capacity(npts); k];
    for i in 0..npts {
        let row = lines.numbers(k + 2)?;
        if row[0] as usize != i {
            return Err(lines.err("value rows out of order"));
        }
        u.push(row[1]);
        for m in 0..k {
            values[m].push(row[m + 2]);
        }
    }
    lines.comment()?;
    let mut ratios = vec![Vec::with_capacity(npts); k];
    for i in 0..npts {
        let row = lines.numbers(k + 1)?;
        if row[0] as usize != i {
            return Err(lines.err("ratio rows out of order"));
        }
        for m in 0..k {
            ratios[m].push(row[m + 1]);
        }
    }
    Ok(SpectralBasis::assemble(domain, grid, kind, potential, u, lambdas, values, ratios))
}

pub fn read_basis(path: &Path) -> Result<SpectralBasis> {
    let text = fs::read_to_string(path).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_basis(&text, path)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::spectral::{build_grid, eigensystem_fd, tensor_basis, Potential};

    #[test]
    fn round_trip_is_bit_identical() {
        let g = build_grid(&Domain::interval(1.0).unwrap(), 64).unwrap();
        let b = eigensystem_fd(&Potential::linear(0.7), &g, 6).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.txt");
        write_basis(&b, &p).unwrap();
        let back = read_basis(&p).unwrap();
        assert_eq!(render_basis(&back), fs::read_to_string(&p).unwrap());
        assert_eq!(back.lambdas(), b.lambdas());
        for m in 0..6 {
            assert_eq!(back.phi(m), b.phi(m));
            assert_eq!(back.ratio(m), b.ratio(m));
        }
        assert_eq!(back.mu_weights(), b.mu_weights());
    }

    #[test]
    fn box_round_trip() {
        let g = build_grid(&Domain::interval(PI).unwrap(), 17).unwrap();
        let f = crate::spectral::eigensystem_closed_form(PI, 3, &g).unwrap();
        let b = tensor_basis(&[f.clone(), f], 4).unwrap();
        let text = render_basis(&b);
        let back = parse_basis(&text, Path::new("mem")).unwrap();
        assert_eq!(render_basis(&back), text);
        assert_eq!(back.dim(), 2);
    }

    #[test]
    fn corrupted_file_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("broken.txt");
        fs::write(&p, "#qsdlab-basis/1\nkind closed-form\ndomain interval nope\n").unwrap();
        let err = read_basis(&p).unwrap_err().to_string();
        assert!(err.contains("broken.txt"), "{err}");
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(x in proptest::num::f64::NORMAL) {
            let s = format!("{x:.16e}");
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
