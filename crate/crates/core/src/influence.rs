//! Boolean influence matrix: rows are failure events, columns are candidate
//! sensors, and a set cell means the sensor reacts to the event.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::network::{event_locations, Network};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfluenceMatrix {
    events: Vec<String>,
    sensors: Vec<String>,
    /// One bit set per sensor, `events.len()` bits long.
    columns: Vec<FixedBitSet>,
}

/// Per-sensor detected-event sets over a universe of `universe` events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionSets {
    pub sets: Vec<FixedBitSet>,
    pub universe: usize,
}

impl DetectionSets {
    pub fn new(universe: usize, sets: Vec<FixedBitSet>) -> Self {
        debug_assert!(sets.iter().all(|s| s.len() == universe));
        DetectionSets { sets, universe }
    }

    /// Builds sets from explicit member lists; members must be `< universe`.
    pub fn from_members(universe: usize, members: &[Vec<usize>]) -> Self {
        let sets = members
            .iter()
            .map(|m| {
                let mut s = FixedBitSet::with_capacity(universe);
                for &e in m {
                    s.insert(e);
                }
                s
            })
            .collect();
        DetectionSets { sets, universe }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Largest set size, `k`.
    pub fn max_set_size(&self) -> usize {
        self.sets
            .iter()
            .map(|s| s.count_ones(..))
            .max()
            .unwrap_or(0)
    }

    /// Union of every set.
    pub fn union_all(&self) -> FixedBitSet {
        let mut u = FixedBitSet::with_capacity(self.universe);
        for s in &self.sets {
            u.union_with(s);
        }
        u
    }
}

fn check_unique(kind: &'static str, ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId {
                kind,
                id: id.clone(),
            });
        }
    }
    Ok(())
}

impl InfluenceMatrix {
    pub fn from_columns(
        events: Vec<String>,
        sensors: Vec<String>,
        columns: Vec<FixedBitSet>,
    ) -> Result<Self> {
        check_unique("event", &events)?;
        check_unique("sensor", &sensors)?;
        assert_eq!(columns.len(), sensors.len(), "one column per sensor");
        assert!(columns.iter().all(|c| c.len() == events.len()));
        Ok(InfluenceMatrix {
            events,
            sensors,
            columns,
        })
    }

    /// Builds from row-major Boolean cells, `rows[j][i]` = sensor `i` sees event `j`.
    pub fn from_rows(
        events: Vec<String>,
        sensors: Vec<String>,
        rows: &[Vec<bool>],
    ) -> Result<Self> {
        let n = events.len();
        let m = sensors.len();
        assert_eq!(rows.len(), n, "one row per event");
        let mut columns = vec![FixedBitSet::with_capacity(n); m];
        for (j, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), m, "row width must equal the sensor count");
            for (i, &cell) in row.iter().enumerate() {
                columns[i].set(j, cell);
            }
        }
        Self::from_columns(events, sensors, columns)
    }

    /// Matrix with generated ids `e0..` and `s0..`.
    pub fn from_bool_rows(rows: &[Vec<bool>], m: usize) -> Self {
        let events = (0..rows.len()).map(|j| format!("e{j}")).collect();
        let sensors = (0..m).map(|i| format!("s{i}")).collect();
        Self::from_rows(events, sensors, rows).expect("generated ids are unique")
    }

    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn sensors(&self) -> &[String] {
        &self.sensors
    }

    /// Number of events (rows).
    pub fn n(&self) -> usize {
        self.events.len()
    }

    /// Number of sensors (columns).
    pub fn m(&self) -> usize {
        self.sensors.len()
    }

    pub fn get(&self, event: usize, sensor: usize) -> bool {
        self.columns[sensor].contains(event)
    }

    pub fn column(&self, sensor: usize) -> &FixedBitSet {
        &self.columns[sensor]
    }

    pub fn columns(&self) -> &[FixedBitSet] {
        &self.columns
    }

    pub fn row(&self, event: usize) -> Vec<bool> {
        self.columns.iter().map(|c| c.contains(event)).collect()
    }

    pub fn sensor_index(&self, id: &str) -> Option<usize> {
        self.sensors.iter().position(|s| s == id)
    }

    /// Resolves sensor ids to column indices.
    pub fn sensor_indices<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                let id = id.as_ref();
                self.sensor_index(id)
                    .ok_or_else(|| Error::UnknownSensor(id.to_string()))
            })
            .collect()
    }

    /// Checks that every index addresses a column.
    pub fn check_sensor_set(&self, set: &[usize]) -> Result<()> {
        check_indices(set, self.m())
    }

    /// Writes the influence CSV: header `event,<sensor ids>`, then one row per event.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once("event").chain(self.sensors.iter().map(String::as_str));
        w.write_record(header).expect("write to memory");
        for (j, event) in self.events.iter().enumerate() {
            let cells = self
                .columns
                .iter()
                .map(|c| if c.contains(j) { "1" } else { "0" });
            w.write_record(std::iter::once(event.as_str()).chain(cells))
                .expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
    }
}

pub(crate) fn check_indices(set: &[usize], sensors: usize) -> Result<()> {
    match set.iter().find(|&&i| i >= sensors) {
        Some(&index) => Err(Error::SensorIndexOutOfRange { index, sensors }),
        None => Ok(()),
    }
}

/// Distance-threshold sensing: cell (j, i) is set iff the shortest path from
/// event `j` to sensor node `i` is at most `epsilon_m`.
pub fn build_influence_matrix<S: AsRef<str>>(
    net: &Network,
    sensor_nodes: &[S],
    epsilon_m: f64,
) -> Result<InfluenceMatrix> {
    if !(epsilon_m > 0.0) {
        return Err(Error::NonPositiveEpsilon(epsilon_m));
    }
    let sensor_idx = sensor_nodes
        .iter()
        .map(|s| {
            let s = s.as_ref();
            net.node_index(s)
                .ok_or_else(|| Error::UnknownNode(s.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let events = event_locations(net);
    let n = events.len();

    let event_rows = |e: &crate::network::EventPoint| -> Result<Vec<bool>> {
        let d = net.event_distances(e)?;
        Ok(sensor_idx
            .iter()
            .map(|&v| d[v].is_within(epsilon_m))
            .collect())
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<bool>> = {
        use rayon::prelude::*;
        events.par_iter().map(event_rows).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<bool>> = events.iter().map(event_rows).collect::<Result<_>>()?;

    let mut columns = vec![FixedBitSet::with_capacity(n); sensor_idx.len()];
    for (j, row) in rows.iter().enumerate() {
        for (i, &hit) in row.iter().enumerate() {
            columns[i].set(j, hit);
        }
    }
    InfluenceMatrix::from_columns(
        events.into_iter().map(|e| e.event_id).collect(),
        sensor_nodes
            .iter()
            .map(|s| s.as_ref().to_string())
            .collect(),
        columns,
    )
}

/// Parses the influence CSV format written by [`InfluenceMatrix::to_csv`].
pub fn load_influence_matrix(text: &str) -> Result<InfluenceMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::MissingHeader),
    };
    let first = header.get(0).unwrap_or("");
    if first != "event" {
        return Err(Error::BadHeader(first.to_string()));
    }
    let sensors: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let width = header.len();

    let mut events = Vec::new();
    let mut rows = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(Error::RaggedRow {
                line,
                expected: width,
                found: record.len(),
            });
        }
        events.push(record[0].to_string());
        let row = record
            .iter()
            .skip(1)
            .map(|cell| match cell {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::CellDomain {
                    line,
                    value: other.to_string(),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    InfluenceMatrix::from_rows(events, sensors, &rows)
}

/// `C_i` for every sensor: the events each column detects.
pub fn detection_sets(matrix: &InfluenceMatrix) -> DetectionSets {
    DetectionSets::new(matrix.n(), matrix.columns.clone())
}

impl From<&DetectionSets> for InfluenceMatrix {
    fn from(sets: &DetectionSets) -> Self {
        let events = (0..sets.universe).map(|j| format!("e{j}")).collect();
        let sensors = (0..sets.len()).map(|i| format!("s{i}")).collect();
        InfluenceMatrix::from_columns(events, sensors, sets.sets.clone())
            .expect("generated ids are unique")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::network::{Link, Network, Node};

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
    fn chain_with_end_sensors() {
        let net = chain(&[100.0, 100.0, 100.0]);
        let m = build_influence_matrix(&net, &["n0", "n3"], 120.0).unwrap();
        assert_eq!(m.row(0), vec![true, false]);
        assert_eq!(m.row(1), vec![false, false]);
        assert_eq!(m.row(2), vec![false, true]);
    }

    #[test]
    fn epsilon_extremes() {
        let net = chain(&[100.0, 100.0, 100.0]);
        let all = ["n0", "n1", "n2", "n3"];
        let none = build_influence_matrix(&net, &all, 49.0).unwrap();
        assert!(none.columns().iter().all(|c| c.count_ones(..) == 0));
        let full = build_influence_matrix(&net, &all, 1e12).unwrap();
        assert!(full.columns().iter().all(|c| c.count_ones(..) == 3));
        // tie at exactly epsilon counts as detected
        let tie = build_influence_matrix(&net, &["n0"], 50.0).unwrap();
        assert!(tie.get(0, 0));
    }

    #[test]
    fn build_errors() {
        let net = chain(&[10.0]);
        assert!(matches!(
            build_influence_matrix(&net, &["n0"], 0.0),
            Err(Error::NonPositiveEpsilon(_))
        ));
        assert!(matches!(
            build_influence_matrix(&net, &["nx"], 1.0),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn fixture_rows_and_columns() {
        let m = fixture::example_matrix();
        assert_eq!((m.n(), m.m()), (10, 8));
        assert_eq!(
            m.row(0),
            vec![true, true, true, false, true, false, false, false]
        );
        let c = detection_sets(&m);
        let c4: Vec<usize> = c.sets[3].ones().collect();
        assert_eq!(c4, (1..10).collect::<Vec<_>>());
        let c1: Vec<usize> = c.sets[0].ones().collect();
        assert_eq!(c1, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            load_influence_matrix("event,a\nx,2\n"),
            Err(Error::CellDomain { .. })
        ));
        assert!(matches!(
            load_influence_matrix("event,a,b\nx,1\n"),
            Err(Error::RaggedRow { .. })
        ));
        assert!(matches!(
            load_influence_matrix("event,a,a\nx,1,0\n"),
            Err(Error::DuplicateId { .. })
        ));
        assert!(matches!(
            load_influence_matrix(""),
            Err(Error::MissingHeader)
        ));
        assert!(matches!(
            load_influence_matrix("id,a\n"),
            Err(Error::BadHeader(_))
        ));
    }

    #[test]
    fn single_cell() {
        let m = load_influence_matrix("event,s\ne,1\n").unwrap();
        assert_eq!(detection_sets(&m).union_all().count_ones(..), 1);
    }

    #[test]
    fn all_zero_rows_kept() {
        let m = load_influence_matrix("event,s\na,0\nb,1\n").unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.row(0), vec![false]);
    }
}
