//! Node/link graphs such as a square-lattice plaquette, and loss chains along
//! paths through them.

use serde::{Deserialize, Serialize};

use super::config::db_to_loss;
use crate::error::{Error, Result};
use crate::gaussian::ChannelElement;
use crate::thermal::planck_occupation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub length_m: f64,
    pub attenuation_db_per_km: f64,
    pub bath_temperature_k: f64,
}

impl LinkParams {
    pub fn loss(&self) -> f64 {
        db_to_loss(self.attenuation_db_per_km * self.length_m / 1000.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyLink {
    pub a: usize,
    pub b: usize,
    pub params: LinkParams,
}

/// Undirected graph of named nodes. Each node has an insertion loss (linear)
/// and a bath temperature, applied when a path passes through it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<String>,
    pub insertion: Vec<(f64, f64)>,
    pub links: Vec<TopologyLink>,
}

impl Topology {
    pub fn add_node(&mut self, name: impl Into<String>, insertion_loss: f64, bath_k: f64) -> usize {
        self.nodes.push(name.into());
        self.insertion.push((insertion_loss, bath_k));
        self.nodes.len() - 1
    }

    pub fn add_link(&mut self, link: TopologyLink) -> Result<()> {
        let n = self.nodes.len();
        if link.a >= n || link.b >= n || link.a == link.b {
            return Err(Error::Topology(format!("bad link endpoints {}–{}", link.a, link.b)));
        }
        let p = link.params;
        if !(p.length_m > 0.0 && p.attenuation_db_per_km >= 0.0 && p.bath_temperature_k >= 0.0) {
            return Err(Error::Topology("link parameters out of range".into()));
        }
        self.links.push(link);
        Ok(())
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn link_between(&self, a: usize, b: usize) -> Option<&TopologyLink> {
        self.links
            .iter()
            .find(|l| (l.a == a && l.b == b) || (l.a == b && l.b == a))
    }

    pub fn neighbours(&self, node: usize) -> Vec<usize> {
        self.links
            .iter()
            .filter_map(|l| match (l.a == node, l.b == node) {
                (true, _) => Some(l.b),
                (_, true) => Some(l.a),
                _ => None,
            })
            .collect()
    }
}

/// `rows × cols` grid of nodes `n{r}_{c}` joined to their horizontal and
/// vertical neighbours by identical links.
pub fn square_lattice(
    rows: usize,
    cols: usize,
    params: LinkParams,
    insertion_loss: f64,
    node_bath_k: f64,
) -> Result<Topology> {
    let mut t = Topology::default();
    for r in 0..rows {
        for c in 0..cols {
            t.add_node(format!("n{r}_{c}"), insertion_loss, node_bath_k);
        }
    }
    let link = |a, b| TopologyLink { a, b, params };
    for r in 0..rows {
        for c in 0..cols {
            let i = r * cols + c;
            if c + 1 < cols {
                t.add_link(link(i, i + 1))?;
            }
            if r + 1 < rows {
                t.add_link(link(i, i + cols))?;
            }
        }
    }
    Ok(t)
}

/// Loss channels acting on `mode` along a node path: each link's cable loss,
/// with the insertion loss of every intermediate node in between.
/// An empty or single-node path gives the identity (empty) chain.
pub fn compose_multihop(
    topology: &Topology,
    path: &[usize],
    frequency_hz: f64,
    mode: usize,
) -> Result<Vec<ChannelElement<f64>>> {
    if let Some(&bad) = path.iter().find(|&&p| p >= topology.nodes.len()) {
        return Err(Error::Topology(format!("node {bad} does not exist")));
    }
    let mut chain = Vec::new();
    for (hop, pair) in path.windows(2).enumerate() {
        let link = topology.link_between(pair[0], pair[1]).ok_or_else(|| {
            Error::Topology(format!(
                "path is disconnected between {} and {}",
                topology.nodes[pair[0]], topology.nodes[pair[1]]
            ))
        })?;
        if hop > 0 {
            let (loss, bath) = topology.insertion[pair[0]];
            if loss > 0.0 {
                chain.push(ChannelElement::Loss {
                    mode,
                    loss,
                    env_photons: planck_occupation(frequency_hz, bath),
                });
            }
        }
        chain.push(ChannelElement::Loss {
            mode,
            loss: link.params.loss(),
            env_photons: planck_occupation(frequency_hz, link.params.bath_temperature_k),
        });
    }
    Ok(chain)
}

/// Two loss channels `(ε, n)` applied in order, as one equivalent channel.
pub fn compose_losses(first: (f64, f64), second: (f64, f64)) -> (f64, f64) {
    let (e1, n1) = first;
    let (e2, n2) = second;
    let eta = (1.0 - e1) * (1.0 - e2);
    let loss = 1.0 - eta;
    if loss == 0.0 {
        return (0.0, 0.0);
    }
    // (1−η)·N = (1−ε₂)ε₁N₁ + ε₂N₂ with N = (1 + 2n)/4
    let noise = ((1.0 - e2) * e1 * (1.0 + 2.0 * n1) + e2 * (1.0 + 2.0 * n2)) / loss;
    (loss, (noise - 1.0) / 2.0)
}

/// Merges consecutive losses on the same mode whose baths are equal.
pub fn merge_equal_baths(chain: &[ChannelElement<f64>]) -> Vec<ChannelElement<f64>> {
    let mut out: Vec<ChannelElement<f64>> = Vec::with_capacity(chain.len());
    for el in chain {
        if let (
            Some(ChannelElement::Loss {
                mode: m0,
                loss: e0,
                env_photons: n0,
            }),
            ChannelElement::Loss {
                mode,
                loss,
                env_photons,
            },
        ) = (out.last_mut(), el)
        {
            if *m0 == *mode && *n0 == *env_photons {
                *e0 = 1.0 - (1.0 - *e0) * (1.0 - loss);
                continue;
            }
        }
        out.push(el.clone());
    }
    out
}
