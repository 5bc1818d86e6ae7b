//! Name-based map construction.
//!
//! Grammar, after splitting on `,`:
//!
//! ```text
//! spec   := item (",compose:" item)*       a,compose:b  means  a ∘ b
//! item   := "compose:" item "," item       outer, inner
//!         | name [":" number ("," number)*]
//! number := re | re(+|-)im"i" | im"i"
//! ```
//!
//! Each factory declares how many numbers it consumes.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use super::catalog;
use super::MapRef;
use crate::error::{Error, Result};
use crate::real::C64;

pub trait MapFactory: Send + Sync {
    /// Number of complex parameters.
    fn arity(&self) -> usize;
    /// Usage line, e.g. `moebius:<a,b,c,d>`.
    fn usage(&self) -> String;
    fn summary(&self) -> String;
    fn build(&self, params: &[C64]) -> Result<MapRef>;
}

struct FnFactory {
    usage: &'static str,
    summary: &'static str,
    arity: usize,
    build: fn(&[C64]) -> Result<MapRef>,
}

impl MapFactory for FnFactory {
    fn arity(&self) -> usize {
        self.arity
    }
    fn usage(&self) -> String {
        self.usage.into()
    }
    fn summary(&self) -> String {
        self.summary.into()
    }
    fn build(&self, params: &[C64]) -> Result<MapRef> {
        (self.build)(params)
    }
}

#[derive(Clone, Default)]
pub struct MapRegistry {
    factories: BTreeMap<String, Arc<dyn MapFactory>>,
}

impl std::fmt::Debug for MapRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl MapRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding every catalog map.
    pub fn with_catalog() -> Self {
        let mut r = Self::new();
        let simple: [(&str, &'static str, &'static str, fn(&[C64]) -> Result<MapRef>); 6] = [
            ("identity", "identity", "z on H", |_| Ok(catalog::identity())),
            ("cayley", "cayley", "(1 + z)/(1 - z), unit disk onto H", |_| Ok(catalog::cayley())),
            ("phi", "phi", "2/(z + 1), H onto D(1,1)", |_| Ok(catalog::phi())),
            ("half-strip-g", "half-strip-g", "-log(-1/z + sqrt(1 + 1/z^2)), H onto a half-strip", |_| {
                Ok(catalog::half_strip_g())
            }),
            ("counterexample-f", "counterexample-f", "half-strip-g composed with phi", |_| {
                Ok(catalog::counterexample_f())
            }),
            ("square", "square", "z^2 on H", |_| Ok(catalog::square())),
        ];
        for (name, usage, summary, build) in simple {
            r.register(name, Arc::new(FnFactory { usage, summary, arity: 0, build }));
        }
        r.register(
            "perturbed-identity",
            Arc::new(FnFactory {
                usage: "perturbed-identity:<c>",
                summary: "z + c·exp(-z) on H, |c| < 1",
                arity: 1,
                build: |p| catalog::perturbed_identity(p[0]),
            }),
        );
        r.register(
            "moebius",
            Arc::new(FnFactory {
                usage: "moebius:<a,b,c,d>",
                summary: "(az + b)/(cz + d) on H, ad - bc != 0",
                arity: 4,
                build: |p| catalog::moebius(p[0], p[1], p[2], p[3]),
            }),
        );
        r
    }

    pub fn register(&mut self, name: &str, factory: Arc<dyn MapFactory>) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn MapFactory>> {
        self.factories.get(name)
    }

    /// `(usage, summary)` for every entry plus the composition form.
    pub fn listing(&self) -> Vec<(String, String)> {
        let mut v: Vec<_> = self.factories.values().map(|f| (f.usage(), f.summary())).collect();
        v.push(("compose:<outer>,<inner>".into(), "outer ∘ inner".into()));
        v
    }

    pub fn parse(&self, spec: &str) -> Result<MapRef> {
        let mut tokens: VecDeque<String> = spec.split(',').map(|t| t.trim().to_string()).collect();
        let mut map = self.parse_item(&mut tokens, spec)?;
        while let Some(tok) = tokens.pop_front() {
            let rest = tok
                .strip_prefix("compose:")
                .ok_or_else(|| Error::Parse(format!("map spec `{spec}`: unexpected token `{tok}`")))?;
            tokens.push_front(rest.to_string());
            let inner = self.parse_item(&mut tokens, spec)?;
            map = catalog::compose(map, inner);
        }
        Ok(map)
    }

    fn parse_item(&self, tokens: &mut VecDeque<String>, spec: &str) -> Result<MapRef> {
        let tok = tokens
            .pop_front()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| Error::Parse(format!("map spec `{spec}`: missing map name")))?;
        let (name, first) = match tok.split_once(':') {
            Some((n, p)) => (n.to_string(), Some(p.to_string())),
            None => (tok, None),
        };
        if name == "compose" {
            let first = first.ok_or_else(|| Error::Parse(format!("map spec `{spec}`: compose needs `<outer>,<inner>`")))?;
            tokens.push_front(first);
            let outer = self.parse_item(tokens, spec)?;
            let inner = self.parse_item(tokens, spec)?;
            return Ok(catalog::compose(outer, inner));
        }
        let factory = self
            .get(&name)
            .ok_or_else(|| Error::Parse(format!("unknown map `{name}`")))?;
        let n = factory.arity();
        let mut raw = Vec::with_capacity(n);
        match (n, first) {
            (0, None) => {}
            (0, Some(p)) => return Err(Error::Parse(format!("map `{name}` takes no parameters, got `{p}`"))),
            (_, None) => return Err(Error::Parse(format!("map `{name}` needs {n} parameter(s): {}", factory.usage()))),
            (_, Some(p)) => {
                raw.push(p);
                for _ in 1..n {
                    let t = tokens.pop_front().ok_or_else(|| {
                        Error::Parse(format!("map `{name}` needs {n} parameters: {}", factory.usage()))
                    })?;
                    raw.push(t);
                }
            }
        }
        let params = raw.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>()?;
        factory.build(&params)
    }
}

/// Parses `re`, `imi`, or `re±imi`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("malformed number `{s}`"));
    let s = s.trim();
    let num = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    let Some(body) = s.strip_suffix('i') else {
        let v = s.parse::<f64>().map_err(|_| bad())?;
        return Ok(C64::new(v, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let z = match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad())?;
            C64::new(re, num(&body[i..])?)
        }
        None => C64::new(0.0, num(body)?),
    };
    if !z.is_finite() {
        return Err(bad());
    }
    Ok(z)
}

/// Inverse of [`parse_complex`] using shortest round-trip digits.
pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}
