//! Named scalar components of a field sample.

use std::fmt;
use std::str::FromStr;

use crate::equilibrium::FieldSample;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    V,
    Sigma(Part, usize),
    Eps(Part, usize),
}

/// Which piece of the stress or strain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Total,
    Elastic,
    Plastic,
}

const COMPONENTS: [&str; 3] = ["11", "12", "22"];

impl Channel {
    /// Every channel, in table column order.
    pub fn all() -> Vec<Channel> {
        let mut out = vec![Channel::V];
        for part in [Part::Total, Part::Elastic, Part::Plastic] {
            out.extend((0..3).map(|k| Channel::Sigma(part, k)));
            out.extend((0..3).map(|k| Channel::Eps(part, k)));
        }
        out
    }

    pub fn name(self) -> String {
        let (base, part, k) = match self {
            Channel::V => return "v".into(),
            Channel::Sigma(p, k) => ("sigma", p, k),
            Channel::Eps(p, k) => ("eps", p, k),
        };
        let suffix = match part {
            Part::Total => "",
            Part::Elastic => "_e",
            Part::Plastic => "_p",
        };
        format!("{base}{suffix}{}", COMPONENTS[k])
    }

    pub fn value(self, s: &FieldSample) -> f64 {
        let pick = |t: &crate::SymTensor2, k: usize| [t.t11, t.t12, t.t22][k];
        match self {
            Channel::V => s.v,
            Channel::Sigma(Part::Total, k) => pick(&s.sigma, k),
            Channel::Sigma(Part::Elastic, k) => pick(&s.sigma_e, k),
            Channel::Sigma(Part::Plastic, k) => pick(&s.sigma_p, k),
            Channel::Eps(Part::Total, k) => pick(&s.eps, k),
            Channel::Eps(Part::Elastic, k) => pick(&s.eps_e, k),
            Channel::Eps(Part::Plastic, k) => pick(&s.eps_p, k),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Channel::all().into_iter().find(|c| c.name() == s).ok_or_else(|| Error::UnknownChannel(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        let all = Channel::all();
        assert_eq!(all.len(), 19);
        for c in all {
            assert_eq!(c.name().parse::<Channel>().unwrap(), c);
        }
        assert!(matches!("tau".parse::<Channel>(), Err(Error::UnknownChannel(_))));
    }
}
