//! Molecular integrals in a restricted spatial-orbital basis.
//!
//! Integrals arrive in the Molpro FCIDUMP text format. Two-body integrals are
//! stored densely in chemists' notation `(pq|rs)` with all eight permutational
//! images filled in.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    pub n_orb: usize,
    pub n_elec_alpha: usize,
    pub n_elec_beta: usize,
    pub e_nuc: f64,
    /// Row-major `n_orb × n_orb`.
    one_body: Vec<f64>,
    /// Row-major `n_orb^4`, chemists' notation.
    two_body: Vec<f64>,
}

impl IntegralSet {
    /// All-zero integrals for `n_orb` orbitals.
    pub fn zeros(n_orb: usize, n_elec_alpha: usize, n_elec_beta: usize) -> Self {
        Self {
            n_orb,
            n_elec_alpha,
            n_elec_beta,
            e_nuc: 0.0,
            one_body: vec![0.0; n_orb * n_orb],
            two_body: vec![0.0; n_orb.pow(4)],
        }
    }

    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n_orb + q]
    }

    /// `(pq|rs)` in chemists' notation.
    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_orb;
        self.two_body[((p * n + q) * n + r) * n + s]
    }

    /// Sets `h_pq` and `h_qp`.
    pub fn set_h1(&mut self, p: usize, q: usize, value: f64) {
        let n = self.n_orb;
        self.one_body[p * n + q] = value;
        self.one_body[q * n + p] = value;
    }

    /// Sets `(pq|rs)` together with its seven permutational images.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        let n = self.n_orb;
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self.two_body[((a * n + b) * n + c) * n + d] = value;
        }
    }

    pub fn n_elec(&self) -> usize {
        self.n_elec_alpha + self.n_elec_beta
    }

    pub fn is_closed_shell(&self) -> bool {
        self.n_elec_alpha == self.n_elec_beta
    }

    /// Number of occupied pairs for a closed-shell system.
    pub fn n_pairs(&self) -> Result<usize> {
        if !self.is_closed_shell() {
            return Err(Error::OpenShell {
                n_alpha: self.n_elec_alpha,
                n_beta: self.n_elec_beta,
            });
        }
        Ok(self.n_elec_alpha)
    }

    /// Checks the symmetry and electron-count invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_orb;
        if self.n_elec() > 2 * n {
            return Err(Error::InvalidArgument(format!(
                "{} electrons do not fit in {} orbitals",
                self.n_elec(),
                n
            )));
        }
        for p in 0..n {
            for q in 0..n {
                if (self.h1(p, q) - self.h1(q, p)).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "one-body integrals not symmetric at ({p},{q})"
                    )));
                }
                for r in 0..n {
                    for s in 0..n {
                        let v = self.eri(p, q, r, s);
                        let images = [
                            self.eri(q, p, r, s),
                            self.eri(p, q, s, r),
                            self.eri(r, s, p, q),
                        ];
                        if images.iter().any(|w| (v - w).abs() > SYMMETRY_TOL) {
                            return Err(Error::InvalidArgument(format!(
                                "two-body integrals not symmetric at ({p}{q}|{r}{s})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_fcidump_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        parse_fcidump(&text)
    }

    /// Emits the integrals in canonical FCIDUMP order: two-body entries with
    /// `i>=j, k>=l, ij>=kl`, then one-body `i>=j`, then the nuclear term.
    /// Values use the shortest representation that round-trips exactly.
    pub fn to_fcidump(&self) -> String {
        let n = self.n_orb;
        let ms2 = self.n_elec_alpha as i64 - self.n_elec_beta as i64;
        let mut out = String::new();
        let _ = writeln!(
            out,
            " &FCI NORB={},NELEC={},MS2={},",
            n,
            self.n_elec(),
            ms2
        );
        let orbsym = vec!["1"; n].join(",");
        let _ = writeln!(out, "  ORBSYM={orbsym},");
        let _ = writeln!(out, "  ISYM=1,");
        let _ = writeln!(out, " &END");
        for i in 0..n {
            for j in 0..=i {
                let ij = i * (i + 1) / 2 + j;
                for k in 0..n {
                    for l in 0..=k {
                        let kl = k * (k + 1) / 2 + l;
                        if kl > ij {
                            continue;
                        }
                        let v = self.eri(i, j, k, l);
                        if v != 0.0 {
                            let _ = writeln!(out, "{:?} {} {} {} {}", v, i + 1, j + 1, k + 1, l + 1);
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..=i {
                let v = self.h1(i, j);
                if v != 0.0 {
                    let _ = writeln!(out, "{:?} {} {} 0 0", v, i + 1, j + 1);
                }
            }
        }
        let _ = writeln!(out, "{:?} 0 0 0 0", self.e_nuc);
        out
    }
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i64,
}

fn parse_header(text: &str) -> Result<(Header, usize)> {
    // The namelist runs from `&FCI` to `&END` or a lone `/`.
    let mut header = String::new();
    let mut body_start = None;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if idx == 0 && !trimmed.to_ascii_uppercase().starts_with("&FCI") {
            return Err(Error::Parse {
                line: 1,
                msg: "expected '&FCI' namelist header".into(),
            });
        }
        let upper = trimmed.to_ascii_uppercase();
        if let Some(pos) = upper.find("&END").or_else(|| (upper == "/").then_some(0)) {
            header.push_str(&trimmed[..pos]);
            body_start = Some(idx + 1);
            break;
        }
        header.push_str(trimmed);
        header.push(',');
    }
    let body_start = body_start.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        msg: "unterminated namelist header (missing &END)".into(),
    })?;

    let header = header.trim_start_matches(|c: char| c == '&' || c.is_ascii_alphabetic());
    let mut norb = None;
    let mut nelec = None;
    let mut ms2 = None;
    let mut key: Option<String> = None;
    // Tokens look like `KEY=value` followed by optional bare list continuations.
    for token in header.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let value = if let Some((k, v)) = token.split_once('=') {
            key = Some(k.trim().to_ascii_uppercase());
            v.trim()
        } else {
            token
        };
        let bad = |msg: String| Error::Parse { line: 1, msg };
        match key.as_deref() {
            Some("NORB") => {
                norb = Some(value.parse::<usize>().map_err(|_| bad(format!("bad NORB '{value}'")))?)
            }
            Some("NELEC") => {
                nelec = Some(value.parse::<usize>().map_err(|_| bad(format!("bad NELEC '{value}'")))?)
            }
            Some("MS2") => {
                ms2 = Some(value.parse::<i64>().map_err(|_| bad(format!("bad MS2 '{value}'")))?)
            }
            _ => {}
        }
    }
    let missing = |what: &str| Error::Parse {
        line: 1,
        msg: format!("header is missing {what}"),
    };
    Ok((
        Header {
            norb: norb.ok_or_else(|| missing("NORB"))?,
            nelec: nelec.ok_or_else(|| missing("NELEC"))?,
            ms2: ms2.unwrap_or(0),
        },
        body_start,
    ))
}

/// Parses FCIDUMP text into a fully symmetrized [`IntegralSet`].
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let (header, body_start) = parse_header(text)?;
    let Header { norb, nelec, ms2 } = header;
    let twice_alpha = nelec as i64 + ms2;
    if twice_alpha < 0 || twice_alpha % 2 != 0 || ms2.unsigned_abs() as usize > nelec {
        return Err(Error::Parse {
            line: 1,
            msg: format!("NELEC={nelec} and MS2={ms2} have mismatched parity"),
        });
    }
    let n_alpha = (twice_alpha / 2) as usize;
    let n_beta = nelec - n_alpha;
    if nelec > 2 * norb {
        return Err(Error::Parse {
            line: 1,
            msg: format!("NELEC={nelec} exceeds 2*NORB={}", 2 * norb),
        });
    }

    let mut ints = IntegralSet::zeros(norb, n_alpha, n_beta);
    for (idx, line) in text.lines().enumerate().skip(body_start) {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 'value i j k l', found {} fields", fields.len()),
            });
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad value '{}'", fields[0]),
            })?;
        let mut idxs = [0usize; 4];
        for (slot, field) in idxs.iter_mut().zip(&fields[1..]) {
            let i: usize = field.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad index '{field}'"),
            })?;
            if i > norb {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("index {i} out of range [0, {norb}]"),
                });
            }
            *slot = i;
        }
        match idxs {
            [0, 0, 0, 0] => ints.e_nuc = value,
            [i, j, 0, 0] if i > 0 && j > 0 => ints.set_h1(i - 1, j - 1, value),
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                ints.set_eri(i - 1, j - 1, k - 1, l - 1, value)
            }
            // Orbital energies (i 0 0 0) carry no Hamiltonian information.
            [_, 0, 0, 0] => {}
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("unrecognized index pattern {idxs:?}"),
                })
            }
        }
    }
    Ok(ints)
}

/// Energy of the closed-shell reference determinant occupying the lowest
/// `n_pairs` orbitals with both spins.
pub fn hf_reference_energy(ints: &IntegralSet) -> Result<f64> {
    let np = ints.n_pairs()?;
    let mut e = ints.e_nuc;
    for i in 0..np {
        e += 2.0 * ints.h1(i, i);
        for j in 0..np {
            e += 2.0 * ints.eri(i, i, j, j) - ints.eri(i, j, i, j);
        }
    }
    Ok(e)
}
