//! Self-describing coefficient files.
//!
//! JSON with a header object and one record per order. Every real is a
//! decimal string in shortest round-trip form (`{:e}`), so reading a file
//! back reproduces the in-memory series bit for bit.

use std::path::Path;

use lindstedt_core::scalar::PRECISION_TAG;
use lindstedt_core::{Cplx, Embedding, EpsSeries, Frequency, MapSpec, Real, ScalarSeries, TrigPoly};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `(k, re ĉ_k, im ĉ_k)` for `k ≥ 0`; negative modes are the conjugates.
pub type ModeRecord = (usize, String, String);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub omega: String,
    pub omega_provenance: String,
    pub tau: String,
    pub nu: String,
    pub k_max: usize,
    pub alpha: usize,
    /// `(k, a_k, b_k)` of `g = Σ a_k cos 2πkθ + b_k sin 2πkθ`.
    pub potential: Vec<ModeRecord>,
    #[serde(rename = "N")]
    pub n: usize,
    pub precision: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderRecord {
    pub n: usize,
    pub mu: String,
    /// `u_n`, the ε^n coefficient of the offset `x(θ) − θ`.
    pub u: Vec<ModeRecord>,
    pub y: Vec<ModeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    pub header: Header,
    pub orders: Vec<OrderRecord>,
}

pub fn decimal(x: Real) -> String {
    format!("{x:e}")
}

fn parse_decimal(s: &str) -> Result<Real, CliError> {
    s.parse::<Real>()
        .map_err(|_| CliError::Validation(format!("malformed decimal {s:?}")))
}

fn line<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("coefficient file serializes")
}

fn modes_out(p: &TrigPoly) -> Vec<ModeRecord> {
    p.modes()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
        .map(|(k, c)| (k, decimal(c.re), decimal(c.im)))
        .collect()
}

fn modes_in(records: &[ModeRecord]) -> Result<TrigPoly, CliError> {
    let deg = records.iter().map(|r| r.0).max().unwrap_or(0);
    let mut modes = vec![Cplx::new(0.0, 0.0); if records.is_empty() { 0 } else { deg + 1 }];
    for (k, re, im) in records {
        modes[*k] = Cplx::new(parse_decimal(re)?, parse_decimal(im)?);
    }
    Ok(TrigPoly::from_modes(modes))
}

impl CoefficientFile {
    pub fn new(map: &MapSpec, omega_provenance: &str, k: &Embedding, mu: &ScalarSeries) -> Self {
        let freq = map.freq();
        let order = k.order().min(mu.order());
        let header = Header {
            omega: decimal(freq.omega()),
            omega_provenance: omega_provenance.into(),
            tau: decimal(freq.tau()),
            nu: decimal(freq.nu()),
            k_max: freq.k_max(),
            alpha: map.alpha(),
            potential: map
                .g()
                .to_cos_sin()
                .into_iter()
                .map(|(k, a, b)| (k, decimal(a), decimal(b)))
                .collect(),
            n: order,
            precision: PRECISION_TAG.into(),
        };
        let orders = (0..=order)
            .map(|n| OrderRecord {
                n,
                mu: decimal(*mu.coeff(n)),
                u: modes_out(k.x.coeff(n)),
                y: modes_out(k.y.coeff(n)),
            })
            .collect();
        Self { header, orders }
    }

    /// JSON with the header on one line and one line per order. Field order
    /// is fixed, so equal contents give equal bytes.
    pub fn to_json(&self) -> String {
        let mut s = format!("{{\n\"header\": {},\n\"orders\": [\n", line(&self.header));
        for (i, r) in self.orders.iter().enumerate() {
            s.push_str(&line(r));
            s.push_str(if i + 1 < self.orders.len() { ",\n" } else { "\n" });
        }
        s.push_str("]\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: CoefficientFile =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("coefficient file: {e}")))?;
        if file.orders.len() != file.header.n + 1 || file.orders.iter().enumerate().any(|(i, r)| r.n != i) {
            return Err(CliError::Validation(format!(
                "coefficient file: expected orders 0..={} in sequence",
                file.header.n
            )));
        }
        if file.header.precision != PRECISION_TAG {
            return Err(CliError::Validation(format!(
                "coefficient file precision {:?} does not match this build ({PRECISION_TAG})",
                file.header.precision
            )));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn potential(&self) -> Result<TrigPoly, CliError> {
        let terms = self
            .header
            .potential
            .iter()
            .map(|(k, a, b)| Ok((*k, parse_decimal(a)?, parse_decimal(b)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(TrigPoly::from_cos_sin(&terms))
    }

    /// Rebuilds the map with the recorded `ν` (no re-estimation).
    pub fn map(&self) -> Result<MapSpec, CliError> {
        let h = &self.header;
        let freq = Frequency::new(parse_decimal(&h.omega)?, parse_decimal(&h.nu)?, parse_decimal(&h.tau)?, h.k_max)?;
        Ok(MapSpec::new(self.potential()?, h.alpha, freq)?)
    }

    pub fn solution(&self) -> Result<(Embedding, ScalarSeries), CliError> {
        let mut u = Vec::with_capacity(self.orders.len());
        let mut y = Vec::with_capacity(self.orders.len());
        let mut mu = Vec::with_capacity(self.orders.len());
        for r in &self.orders {
            u.push(modes_in(&r.u)?);
            y.push(modes_in(&r.y)?);
            mu.push(parse_decimal(&r.mu)?);
        }
        Ok((
            Embedding {
                x: EpsSeries::from_coeffs(u),
                y: EpsSeries::from_coeffs(y),
            },
            ScalarSeries::from_coeffs(mu),
        ))
    }

    /// Files describe the same problem when `ω`, `α` and `g` agree.
    pub fn same_problem(&self, other: &Self) -> Result<(), CliError> {
        let (a, b) = (&self.header, &other.header);
        if a.omega != b.omega || a.alpha != b.alpha || self.potential()? != other.potential()? {
            return Err(CliError::Validation(format!(
                "headers describe different problems: (ω, α) = ({}, {}) vs ({}, {}), potentials {:?} vs {:?}",
                a.omega, a.alpha, b.omega, b.alpha, a.potential, b.potential
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lindstedt_core::{direct_expansion, hull_to_embedding};

    #[test]
    fn write_then_read_is_exact() {
        let map = MapSpec::sine(3, Frequency::golden(1.0, 1000).unwrap()).unwrap();
        let h = direct_expansion(&map, 12).unwrap();
        let k = hull_to_embedding(&h, &map);
        let file = CoefficientFile::new(&map, "golden", &k, &h.mu);
        let back = CoefficientFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let (k2, mu2) = back.solution().unwrap();
        assert_eq!(k2, k);
        assert_eq!(mu2, h.mu);
        let map2 = back.map().unwrap();
        assert_eq!(map2.g(), map.g());
        assert_eq!(map2.omega(), map.omega());
        assert_eq!(map2.freq().nu(), map.freq().nu());
    }

    #[test]
    fn decimals_are_shortest_round_trip() {
        for x in [0.1, -0.0, 1e-300, 6.02e23, Real::MIN_POSITIVE, std::f64::consts::PI] {
            assert_eq!(parse_decimal(&decimal(x)).unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn rejects_gaps_in_orders() {
        let map = MapSpec::sine(3, Frequency::golden(1.0, 100).unwrap()).unwrap();
        let h = direct_expansion(&map, 3).unwrap();
        let mut file = CoefficientFile::new(&map, "golden", &hull_to_embedding(&h, &map), &h.mu);
        file.orders.remove(2);
        assert!(CoefficientFile::from_json(&file.to_json()).is_err());
    }
}
