use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{cf_product, CFNumber, ContFracError};

/// Serializable description of a [`CFNumber`]. Elements are carried as
/// decimal strings because they routinely exceed 64 bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CfSpec {
    Biased,
    Golden,
    Constant { element: u64 },
    SelfPower,
    EvenSelfPower,
    Periodic { period: Vec<String> },
    Prefix { elements: Vec<String>, tail: Box<CfSpec> },
    Product { odd: Box<CfSpec>, even: Box<CfSpec> },
}

fn parse_elements(raw: &[String]) -> Result<Vec<BigUint>, ContFracError> {
    raw.iter()
        .map(|s| {
            let a: BigUint = s
                .trim()
                .parse()
                .map_err(|_| ContFracError::InvalidElement(s.clone()))?;
            if a.is_zero() {
                return Err(ContFracError::InvalidElement(s.clone()));
            }
            Ok(a)
        })
        .collect()
}

impl CfSpec {
    pub fn build(&self) -> Result<CFNumber, ContFracError> {
        Ok(match self {
            CfSpec::Biased => CFNumber::biased(),
            CfSpec::Golden => CFNumber::golden(),
            CfSpec::Constant { element } => {
                if *element == 0 {
                    return Err(ContFracError::InvalidElement("0".into()));
                }
                CFNumber::constant(*element)
            }
            CfSpec::SelfPower => CFNumber::self_power(),
            CfSpec::EvenSelfPower => CFNumber::even_self_power(),
            CfSpec::Periodic { period } => {
                let p = parse_elements(period)?;
                if p.is_empty() {
                    return Err(ContFracError::InvalidElement("empty period".into()));
                }
                CFNumber::periodic(p)
            }
            CfSpec::Prefix { elements, tail } => {
                CFNumber::with_prefix(parse_elements(elements)?, tail.build()?)
            }
            CfSpec::Product { odd, even } => cf_product(&odd.build()?, &even.build()?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_form() {
        let spec = CfSpec::Prefix {
            elements: vec!["18446744073709551617".into(), "3".into()],
            tail: Box::new(CfSpec::Golden),
        };
        let s = serde_json::to_string(&spec).unwrap();
        let back: CfSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let x = spec.build().unwrap();
        assert_eq!(x.element(1).to_string(), "18446744073709551617");
        assert_eq!(x.element(3), BigUint::from(1u32));
    }

    #[test]
    fn rejects_zero_elements() {
        let spec = CfSpec::Periodic { period: vec!["0".into()] };
        assert!(spec.build().is_err());
        assert!(CfSpec::Constant { element: 0 }.build().is_err());
    }

    #[test]
    fn product_spec_matches_biased() {
        let spec = CfSpec::Product {
            odd: Box::new(CfSpec::Constant { element: 4 }),
            even: Box::new(CfSpec::EvenSelfPower),
        };
        let x = spec.build().unwrap();
        assert_eq!(x.prefix(8), CFNumber::biased().prefix(8));
    }
}
