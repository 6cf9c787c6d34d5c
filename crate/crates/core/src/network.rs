//! Network description, failure-event enumeration and event-to-node distances.
//!
//! A network is an undirected graph of junction nodes joined by pipes. Each
//! pipe carries exactly one candidate failure event, located at its midpoint
//! unless the caller overrides the offset. Distances from an event to a node
//! are shortest-path lengths in the graph where the event splits its pipe into
//! two segments.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(default)]
    pub elevation_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave_speed_m_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub friction: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkDocument {
    #[serde(default)]
    nodes: Vec<Node>,
    #[serde(default)]
    links: Vec<Link>,
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    length: f64,
}

/// Validated, immutable network graph.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    links: Vec<Link>,
    node_index: HashMap<String, usize>,
    link_index: HashMap<String, usize>,
    endpoints: Vec<(usize, usize)>,
    adjacency: Vec<Vec<Edge>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.links == other.links
    }
}

/// Location of a single failure event on a link.
#[derive(Debug, Clone, PartialEq)]
pub struct EventPoint {
    pub event_id: String,
    pub link_id: String,
    pub offset_fraction: f64,
}

/// Shortest-path length, or the explicit unreachable marker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distance {
    Finite(f64),
    Unreachable,
}

impl Distance {
    pub fn meters(self) -> Option<f64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }

    /// `d <= epsilon`; unreachable is never within range.
    pub fn is_within(self, epsilon: f64) -> bool {
        matches!(self, Distance::Finite(d) if d <= epsilon)
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Distance::Finite(a), Distance::Finite(b)) => a.partial_cmp(b),
            (Distance::Finite(_), Distance::Unreachable) => Some(Ordering::Less),
            (Distance::Unreachable, Distance::Finite(_)) => Some(Ordering::Greater),
            (Distance::Unreachable, Distance::Unreachable) => Some(Ordering::Equal),
        }
    }
}

fn check_finite(
    id: &str,
    field: &'static str,
    value: f64,
    min_exclusive: Option<f64>,
) -> Result<()> {
    let ok = value.is_finite() && min_exclusive.map_or(value >= 0.0, |m| value > m);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidField {
            id: id.to_string(),
            field,
            value,
        })
    }
}

impl Network {
    /// Builds a network from node and link lists, validating every invariant.
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self> {
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if node_index.insert(node.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "node",
                    id: node.id.clone(),
                });
            }
            check_finite(&node.id, "elevation_m", node.elevation_m, None)?;
        }

        let mut link_index = HashMap::with_capacity(links.len());
        let mut endpoints = Vec::with_capacity(links.len());
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (i, link) in links.iter().enumerate() {
            if link_index.insert(link.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "link",
                    id: link.id.clone(),
                });
            }
            let lookup = |node: &str| {
                node_index
                    .get(node)
                    .copied()
                    .ok_or_else(|| Error::DanglingEndpoint {
                        link: link.id.clone(),
                        node: node.to_string(),
                    })
            };
            let from = lookup(&link.from)?;
            let to = lookup(&link.to)?;
            if from == to {
                return Err(Error::SelfLoop {
                    link: link.id.clone(),
                    node: link.from.clone(),
                });
            }
            if !(link.length_m.is_finite() && link.length_m > 0.0) {
                return Err(Error::NonPositiveLength {
                    link: link.id.clone(),
                    length: link.length_m,
                });
            }
            if let Some(d) = link.diameter_m {
                check_finite(&link.id, "diameter_m", d, Some(0.0))?;
            }
            if let Some(a) = link.wave_speed_m_s {
                check_finite(&link.id, "wave_speed_m_s", a, Some(0.0))?;
            }
            if let Some(c) = link.friction {
                check_finite(&link.id, "friction", c, None)?;
            }
            endpoints.push((from, to));
            adjacency[from].push(Edge {
                to,
                length: link.length_m,
            });
            adjacency[to].push(Edge {
                to: from,
                length: link.length_m,
            });
        }

        Ok(Network {
            nodes,
            links,
            node_index,
            link_index,
            endpoints,
            adjacency,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.link_index.get(id).copied()
    }

    /// Endpoint node indices of link `link`.
    pub fn endpoints(&self, link: usize) -> (usize, usize) {
        self.endpoints[link]
    }

    /// Serializes to the JSON network document format.
    pub fn to_json(&self) -> String {
        let doc = NetworkDocument {
            nodes: self.nodes.clone(),
            links: self.links.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("network serialization is infallible")
    }

    /// Labels of connected components, one per node.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for start in 0..self.nodes.len() {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(v) = stack.pop() {
                for e in &self.adjacency[v] {
                    if label[e.to] == usize::MAX {
                        label[e.to] = next;
                        stack.push(e.to);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Shortest distances from `event` to every node, indexed like `nodes()`.
    pub fn event_distances(&self, event: &EventPoint) -> Result<Vec<Distance>> {
        let link = self
            .link_index(&event.link_id)
            .ok_or_else(|| Error::UnknownLink(event.link_id.clone()))?;
        let (from, to) = self.endpoints[link];
        let length = self.links[link].length_m;
        let offset = event.offset_fraction.clamp(0.0, 1.0);
        Ok(self.dijkstra(&[(from, offset * length), (to, (1.0 - offset) * length)]))
    }

    /// Multi-source label-setting search; the event vertex is represented by
    /// seeding both endpoints of its link with the two segment lengths.
    fn dijkstra(&self, seeds: &[(usize, f64)]) -> Vec<Distance> {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        for &(v, d) in seeds {
            if d < dist[v] {
                dist[v] = d;
                heap.push(Label { dist: d, node: v });
            }
        }
        while let Some(Label { dist: d, node: v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for e in &self.adjacency[v] {
                let nd = d + e.length;
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    heap.push(Label {
                        dist: nd,
                        node: e.to,
                    });
                }
            }
        }
        dist.into_iter()
            .map(|d| {
                if d.is_finite() {
                    Distance::Finite(d)
                } else {
                    Distance::Unreachable
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Label {
    dist: f64,
    node: usize,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties on node index for determinism
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Parses a JSON network document. Unknown keys are ignored.
pub fn parse_network(text: &str) -> Result<Network> {
    let doc: NetworkDocument = serde_json::from_str(text)?;
    Network::new(doc.nodes, doc.links)
}

/// One midpoint event per link, in link declaration order.
pub fn event_locations(net: &Network) -> Vec<EventPoint> {
    net.links
        .iter()
        .map(|l| EventPoint {
            event_id: l.id.clone(),
            link_id: l.id.clone(),
            offset_fraction: 0.5,
        })
        .collect()
}

pub fn event_node_distance(net: &Network, event: &EventPoint, node_id: &str) -> Result<Distance> {
    let node = net
        .node_index(node_id)
        .ok_or_else(|| Error::UnknownNode(node_id.to_string()))?;
    Ok(net.event_distances(event)?[node])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(lengths: &[f64]) -> Network {
        let nodes = (0..=lengths.len())
            .map(|i| Node {
                id: format!("n{i}"),
                elevation_m: 0.0,
                x: None,
                y: None,
            })
            .collect();
        let links = lengths
            .iter()
            .enumerate()
            .map(|(i, &len)| Link {
                id: format!("p{i}"),
                from: format!("n{i}"),
                to: format!("n{}", i + 1),
                length_m: len,
                diameter_m: None,
                wave_speed_m_s: None,
                friction: None,
            })
            .collect();
        Network::new(nodes, links).unwrap()
    }

    #[test]
    fn empty_document_is_valid() {
        let net = parse_network(r#"{"nodes": [], "links": []}"#).unwrap();
        assert!(net.nodes().is_empty());
        assert!(event_locations(&net).is_empty());
    }

    #[test]
    fn dangling_endpoint_rejected() {
        let text =
            r#"{"nodes":[{"id":"a"}],"links":[{"id":"l","from":"a","to":"n99","length_m":1}]}"#;
        match parse_network(text) {
            Err(Error::DanglingEndpoint { node, .. }) => assert_eq!(node, "n99"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_and_bad_lengths_rejected() {
        let dup = r#"{"nodes":[{"id":"a"},{"id":"a"}],"links":[]}"#;
        assert!(matches!(parse_network(dup), Err(Error::DuplicateId { .. })));
        let zero = r#"{"nodes":[{"id":"a"},{"id":"b"}],"links":[{"id":"l","from":"a","to":"b","length_m":0}]}"#;
        assert!(matches!(
            parse_network(zero),
            Err(Error::NonPositiveLength { .. })
        ));
        let lp = r#"{"nodes":[{"id":"a"}],"links":[{"id":"l","from":"a","to":"a","length_m":3}]}"#;
        assert!(matches!(parse_network(lp), Err(Error::SelfLoop { .. })));
        assert!(matches!(parse_network("{nodes"), Err(Error::Json(_))));
    }

    #[test]
    fn unknown_keys_ignored() {
        let text = r#"{"title":"x","nodes":[{"id":"a","demand":3},{"id":"b"}],
            "links":[{"id":"l","from":"a","to":"b","length_m":2,"status":"open"}]}"#;
        let net = parse_network(text).unwrap();
        assert_eq!(net.links().len(), 1);
    }

    #[test]
    fn midpoint_distance_is_half_length() {
        let net = chain(&[100.0]);
        let ev = &event_locations(&net)[0];
        assert_eq!(ev.offset_fraction, 0.5);
        assert_eq!(
            event_node_distance(&net, ev, "n0").unwrap(),
            Distance::Finite(50.0)
        );
        assert_eq!(
            event_node_distance(&net, ev, "n1").unwrap(),
            Distance::Finite(50.0)
        );
    }

    #[test]
    fn three_pipe_chain_distance() {
        // failed pipe of 200 m at the far end; 400 + 300 + 100 = 800
        let net = chain(&[300.0, 400.0, 200.0]);
        let ev = &event_locations(&net)[2];
        assert_eq!(
            event_node_distance(&net, ev, "n0").unwrap(),
            Distance::Finite(800.0)
        );
    }

    #[test]
    fn other_component_unreachable() {
        let text = r#"{"nodes":[{"id":"a"},{"id":"b"},{"id":"c"},{"id":"d"}],
            "links":[{"id":"l1","from":"a","to":"b","length_m":10},{"id":"l2","from":"c","to":"d","length_m":10}]}"#;
        let net = parse_network(text).unwrap();
        let ev = &event_locations(&net)[0];
        assert_eq!(
            event_node_distance(&net, ev, "c").unwrap(),
            Distance::Unreachable
        );
        assert!(!Distance::Unreachable.is_within(f64::MAX));
        assert_eq!(net.components(), vec![0, 0, 1, 1]);
        assert!(matches!(
            event_node_distance(&net, ev, "zz"),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn parallel_links_give_distinct_events() {
        let text = r#"{"nodes":[{"id":"a"},{"id":"b"}],
            "links":[{"id":"short","from":"a","to":"b","length_m":10},{"id":"long","from":"a","to":"b","length_m":30}]}"#;
        let net = parse_network(text).unwrap();
        let evs = event_locations(&net);
        assert_eq!(evs.len(), 2);
        assert_eq!(
            event_node_distance(&net, &evs[0], "b").unwrap(),
            Distance::Finite(5.0)
        );
        assert_eq!(
            event_node_distance(&net, &evs[1], "b").unwrap(),
            Distance::Finite(15.0)
        );
    }

    #[test]
    fn json_round_trip() {
        let net = chain(&[1.5, 2.25, 7.0]);
        let again = parse_network(&net.to_json()).unwrap();
        assert_eq!(net, again);
    }
}
