use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{build_layout, HilbertLayout, SubsystemKind, SubsystemSpec};

/// A link between two matter sites, carrying one gauge qubit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub a: String,
    pub b: String,
    pub label: String,
}

/// Matter sites joined by gauge links.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGraph {
    sites: Vec<String>,
    links: Vec<Link>,
}

impl LatticeGraph {
    pub fn new(sites: Vec<String>, links: Vec<Link>) -> Result<Self> {
        let mut site_set = HashSet::new();
        for s in &sites {
            if !site_set.insert(s.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate site `{s}`")));
            }
        }
        let mut labels = HashSet::new();
        for l in &links {
            if l.a == l.b {
                return Err(Error::InvalidGraph(format!("link `{}` is a self-loop on `{}`", l.label, l.a)));
            }
            for end in [&l.a, &l.b] {
                if !site_set.contains(end.as_str()) {
                    return Err(Error::InvalidGraph(format!("link `{}` references unknown site `{end}`", l.label)));
                }
            }
            if !labels.insert(l.label.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate link label `{}`", l.label)));
            }
            if site_set.contains(l.label.as_str()) {
                return Err(Error::InvalidGraph(format!("label `{}` used for both a site and a link", l.label)));
            }
        }
        if sites.is_empty() {
            return Err(Error::InvalidGraph("no sites".into()));
        }
        Ok(Self { sites, links })
    }

    /// Builds a graph from `(site_a, site_b, link_label)` triples; sites are
    /// collected in order of first appearance.
    pub fn from_links<S: AsRef<str>>(triples: &[(S, S, S)]) -> Result<Self> {
        let mut sites: Vec<String> = Vec::new();
        let mut links = Vec::new();
        for (a, b, l) in triples {
            for s in [a.as_ref(), b.as_ref()] {
                if !sites.iter().any(|x| x == s) {
                    sites.push(s.to_string());
                }
            }
            links.push(Link { a: a.as_ref().into(), b: b.as_ref().into(), label: l.as_ref().into() });
        }
        Self::new(sites, links)
    }

    /// Parses the edge-list format: one `site_a site_b link_label` per line.
    /// Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut triples = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "edge list line {}: expected `site_a site_b link_label`, found {} fields",
                    n + 1,
                    fields.len()
                )));
            }
            triples.push((fields[0], fields[1], fields[2]));
        }
        if triples.is_empty() {
            return Err(Error::Parse("edge list contains no links".into()));
        }
        Self::from_links(&triples)
    }

    pub fn to_edge_list(&self) -> String {
        self.links.iter().map(|l| format!("{} {} {}\n", l.a, l.b, l.label)).collect()
    }

    pub fn link() -> Self {
        Self::from_links(&[("m1", "m2", "l")]).expect("static graph")
    }

    pub fn loop_() -> Self {
        Self::from_links(&[("m1", "m2", "l1"), ("m1", "m2", "l2")]).expect("static graph")
    }

    pub fn triangle() -> Self {
        Self::from_links(&[("m1", "m2", "l12"), ("m2", "m3", "l23"), ("m1", "m3", "l13")]).expect("static graph")
    }

    /// Complete graph on four sites.
    pub fn tetrahedron() -> Self {
        Self::from_links(&[
            ("m1", "m2", "l12"),
            ("m1", "m3", "l13"),
            ("m1", "m4", "l14"),
            ("m2", "m3", "l23"),
            ("m2", "m4", "l24"),
            ("m3", "m4", "l34"),
        ])
        .expect("static graph")
    }

    /// Open chain of `sites` matter sites.
    pub fn chain(sites: usize) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidGraph("a chain needs at least two sites".into()));
        }
        let triples: Vec<(String, String, String)> = (1..sites)
            .map(|i| (format!("m{i}"), format!("m{}", i + 1), format!("l{i}")))
            .collect();
        Self::from_links(&triples)
    }

    pub fn sites(&self) -> &[String] {
        &self.sites
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Links with `site` as an endpoint; a doubled link counts twice only
    /// if it appears twice in the list.
    pub fn incident_links(&self, site: &str) -> Vec<&Link> {
        self.links.iter().filter(|l| l.a == site || l.b == site).collect()
    }

    /// Register `[first site, every link, remaining sites]`. For the link
    /// and loop graphs this is `[m1, ℓ, m2]` and `[m1, ℓ1, ℓ2, m2]`.
    pub fn layout(&self, cutoff: usize) -> Result<Arc<HilbertLayout>> {
        let mut specs = vec![SubsystemSpec::oscillator(self.sites[0].clone(), cutoff)];
        specs.extend(self.links.iter().map(|l| SubsystemSpec::qubit(l.label.clone())));
        specs.extend(self.sites[1..].iter().map(|s| SubsystemSpec::oscillator(s.clone(), cutoff)));
        build_layout(specs)
    }

    /// Subsystem indices of every site and link in `layout`, checked by
    /// label and kind.
    pub fn locate(&self, layout: &HilbertLayout) -> Result<GraphIndices> {
        if layout.len() != self.sites.len() + self.links.len() {
            return Err(Error::WrongRegister(format!(
                "graph needs {} oscillators and {} qubits, layout has {} subsystems",
                self.sites.len(),
                self.links.len(),
                layout.len()
            )));
        }
        let find = |label: &str, kind: SubsystemKind| -> Result<usize> {
            let idx = layout
                .index_of(label)
                .ok_or_else(|| Error::WrongRegister(format!("layout has no subsystem `{label}`")))?;
            if layout.subsystems()[idx].kind != kind {
                return Err(Error::WrongRegister(format!("subsystem `{label}` should be a {kind:?}")));
            }
            Ok(idx)
        };
        let sites = self.sites.iter().map(|s| find(s, SubsystemKind::Oscillator)).collect::<Result<_>>()?;
        let links = self.links.iter().map(|l| find(&l.label, SubsystemKind::Qubit)).collect::<Result<_>>()?;
        Ok(GraphIndices { sites, links })
    }

    pub fn site_position(&self, site: &str) -> Option<usize> {
        self.sites.iter().position(|s| s == site)
    }
}

/// Layout indices of a graph's sites and links, in graph order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphIndices {
    pub sites: Vec<usize>,
    pub links: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub qubits: usize,
    pub oscillators: usize,
}

/// One qubit per link, one oscillator per site.
pub fn resource_count(graph: &LatticeGraph) -> ResourceCount {
    ResourceCount { qubits: graph.links().len(), oscillators: graph.sites().len() }
}
