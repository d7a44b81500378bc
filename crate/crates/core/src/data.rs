//! Datasets, CSV ingestion and min-max feature scaling.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Task;

/// Raw label strings behind the internal −1/+1 encoding.
///
/// The two raw labels are ordered by their bytes; the smaller one becomes −1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub negative: String,
    pub positive: String,
}

impl Default for LabelMap {
    fn default() -> Self {
        LabelMap {
            negative: "-1".to_string(),
            positive: "1".to_string(),
        }
    }
}

impl LabelMap {
    /// Map raw labels to ±1. Exactly two distinct values must be present.
    pub fn encode_raw<S: AsRef<str>>(raw: &[S]) -> Result<(LabelMap, Vec<i8>)> {
        let distinct: BTreeSet<&[u8]> = raw.iter().map(|s| s.as_ref().as_bytes()).collect();
        let names: Vec<String> = distinct
            .iter()
            .map(|b| String::from_utf8_lossy(b).into_owned())
            .collect();
        match names.len() {
            2 => {}
            n if n > 2 => return Err(Error::MoreThanTwoClasses(names)),
            _ => return Err(Error::TooFewClasses(names)),
        }
        let map = LabelMap {
            negative: names[0].clone(),
            positive: names[1].clone(),
        };
        let encoded = raw
            .iter()
            .map(|s| if s.as_ref() == map.negative { -1 } else { 1 })
            .collect();
        Ok((map, encoded))
    }

    pub fn encode(&self, raw: &str) -> Option<i8> {
        if raw == self.negative {
            Some(-1)
        } else if raw == self.positive {
            Some(1)
        } else {
            None
        }
    }

    pub fn decode(&self, label: i8) -> &str {
        if label < 0 {
            &self.negative
        } else {
            &self.positive
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Labels { values: Vec<i8>, map: LabelMap },
    Values(Array1<f64>),
}

/// Per-feature affine map onto [0, 1], fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: ArrayView2<'_, f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::EmptyInput("cannot fit a scaler on zero samples".into()));
        }
        let min = x
            .axis_iter(Axis(1))
            .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let max = x
            .axis_iter(Axis(1))
            .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(MinMaxScaler { min, max })
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    /// Apply the recorded map. Constant training features map to 0; values
    /// outside the training range are not clipped.
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::FeatureCountMismatch {
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, hi) = (self.min[j], self.max[j]);
            if hi > lo {
                let range = hi - lo;
                col.mapv_inplace(|v| (v - lo) / range);
            } else {
                col.fill(0.0);
            }
        }
        Ok(out)
    }
}

/// Immutable sample matrix with class labels or real targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Array2<f64>,
    target: Target,
    feature_names: Option<Vec<String>>,
    scaler: Option<MinMaxScaler>,
}

impl Dataset {
    pub fn classification(x: Array2<f64>, labels: Vec<i8>, map: LabelMap) -> Result<Self> {
        if labels.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} samples",
                labels.len(),
                x.nrows()
            )));
        }
        if let Some(bad) = labels.iter().find(|l| l.abs() != 1) {
            return Err(Error::InvalidHyperparameter(format!("label {bad} is not +1 or -1")));
        }
        Self::new(x, Target::Labels { values: labels, map })
    }

    pub fn regression(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} targets for {} samples",
                y.len(),
                x.nrows()
            )));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidHyperparameter("targets contain non-finite values".into()));
        }
        Self::new(x, Target::Values(y))
    }

    fn new(x: Array2<f64>, target: Target) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::EmptyInput(format!(
                "dataset must have at least one sample and one feature, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidHyperparameter("features contain non-finite values".into()));
        }
        Ok(Dataset {
            x,
            target,
            feature_names: None,
            scaler: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        self.feature_names = Some(names);
        self
    }

    pub fn task(&self) -> Task {
        match self.target {
            Target::Labels { .. } => Task::Classify,
            Target::Values(_) => Task::Regress,
        }
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn labels(&self) -> Option<&[i8]> {
        match &self.target {
            Target::Labels { values, .. } => Some(values),
            Target::Values(_) => None,
        }
    }

    pub fn label_map(&self) -> Option<&LabelMap> {
        match &self.target {
            Target::Labels { map, .. } => Some(map),
            Target::Values(_) => None,
        }
    }

    pub fn targets(&self) -> Option<&Array1<f64>> {
        match &self.target {
            Target::Values(y) => Some(y),
            Target::Labels { .. } => None,
        }
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// The scaler most recently applied to the features, if any.
    pub fn scaler(&self) -> Option<&MinMaxScaler> {
        self.scaler.as_ref()
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Rows `idx` in the given order. Subsets may contain a single class.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let target = match &self.target {
            Target::Labels { values, map } => Target::Labels {
                values: idx.iter().map(|&i| values[i]).collect(),
                map: map.clone(),
            },
            Target::Values(y) => Target::Values(idx.iter().map(|&i| y[i]).collect()),
        };
        Dataset {
            x: self.x.select(Axis(0), idx),
            target,
            feature_names: self.feature_names.clone(),
            scaler: self.scaler.clone(),
        }
    }

    /// Fit a min-max scaler on this dataset and apply it.
    pub fn normalize_minmax(&self) -> Result<Dataset> {
        let scaler = MinMaxScaler::fit(self.x.view())?;
        self.apply_scaler(&scaler)
    }

    /// Apply a scaler fitted elsewhere (typically on the training split).
    pub fn apply_scaler(&self, scaler: &MinMaxScaler) -> Result<Dataset> {
        Ok(Dataset {
            x: scaler.transform(self.x.view())?,
            target: self.target.clone(),
            feature_names: self.feature_names.clone(),
            scaler: Some(scaler.clone()),
        })
    }
}

/// Reference to a CSV column, by header name or by zero-based index.
/// Negative indices count from the end (−1 is the last column).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(i64),
    Name(String),
}

impl ColumnRef {
    /// Integers become indices, anything else a header name.
    pub fn parse(s: &str) -> Self {
        match s.trim().parse::<i64>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.trim().to_string()),
        }
    }

    fn resolve(&self, header: Option<&[String]>, width: usize) -> Result<usize> {
        match self {
            ColumnRef::Index(i) => {
                let idx = if *i < 0 { width as i64 + i } else { *i };
                if idx < 0 || idx as usize >= width {
                    return Err(Error::MissingColumn(format!(
                        "column index {i} is out of range for {width} columns"
                    )));
                }
                Ok(idx as usize)
            }
            ColumnRef::Name(name) => header
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| Error::MissingColumn(format!("no column named {name:?}"))),
        }
    }
}

impl std::fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnRef::Index(i) => write!(f, "{i}"),
            ColumnRef::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub target: ColumnRef,
    pub task: Task,
    pub delimiter: u8,
    pub header: bool,
}

impl CsvSchema {
    pub fn classification(label: ColumnRef) -> Self {
        CsvSchema {
            target: label,
            task: Task::Classify,
            delimiter: b',',
            header: false,
        }
    }

    pub fn regression(target: ColumnRef) -> Self {
        CsvSchema {
            target,
            task: Task::Regress,
            delimiter: b',',
            header: false,
        }
    }

    pub fn with_header(mut self, header: bool) -> Self {
        self.header = header;
        self
    }

    pub fn with_delimiter(mut self, delimiter: u8) -> Self {
        self.delimiter = delimiter;
        self
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_from_reader(file, schema)
}

/// Feature matrix plus the unparsed target column, if one was requested.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub x: Array2<f64>,
    pub target: Option<RawColumn>,
    pub feature_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    /// 1-based column number.
    pub column: usize,
    pub values: Vec<String>,
    /// 1-based row number of each value.
    pub rows: Vec<usize>,
}

impl RawColumn {
    /// Parse as real targets.
    pub fn numbers(&self) -> Result<Array1<f64>> {
        self.values
            .iter()
            .zip(&self.rows)
            .map(|(s, &row)| parse_number(s, row, self.column, "target"))
            .collect()
    }

    /// Encode with a known label map; unknown names are parse errors.
    pub fn labels(&self, map: &LabelMap) -> Result<Vec<i8>> {
        self.values
            .iter()
            .zip(&self.rows)
            .map(|(s, &row)| {
                map.encode(s).ok_or_else(|| Error::Parse {
                    row,
                    column: self.column,
                    message: format!(
                        "label {s:?} is neither {:?} nor {:?}",
                        map.negative, map.positive
                    ),
                })
            })
            .collect()
    }
}

/// Read every column as a numeric feature except `target`, which is kept as
/// text. Row and column numbers in errors are 1-based and count the header line.
pub fn read_table<R: Read>(
    reader: R,
    target: Option<&ColumnRef>,
    delimiter: u8,
    header: bool,
) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut names: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut target_col: Option<usize> = None;
    let mut features: Vec<f64> = Vec::new();
    let mut raw = RawColumn {
        column: 0,
        values: Vec::new(),
        rows: Vec::new(),
    };
    let mut n = 0;

    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if header && names.is_none() {
            names = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        match width {
            None => {
                let w = record.len();
                if let Some(h) = &names {
                    if h.len() != w {
                        return Err(Error::Parse {
                            row,
                            column: 0,
                            message: format!("header has {} fields but row has {w}", h.len()),
                        });
                    }
                }
                target_col = target.map(|t| t.resolve(names.as_deref(), w)).transpose()?;
                width = Some(w);
            }
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    row,
                    column: 0,
                    message: format!("expected {w} fields, found {}", record.len()),
                });
            }
            Some(_) => {}
        }
        for (j, field) in record.iter().enumerate() {
            if Some(j) == target_col {
                raw.values.push(field.to_string());
                raw.rows.push(row);
                continue;
            }
            features.push(parse_number(field, row, j + 1, "feature")?);
        }
        n += 1;
    }

    let Some(w) = width else {
        return Err(Error::EmptyInput("CSV contains no data rows".into()));
    };
    let m = w - usize::from(target_col.is_some());
    let x = Array2::from_shape_vec((n, m), features).map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let feature_names = names.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(j, _)| Some(*j) != target_col)
            .map(|(_, s)| s)
            .collect::<Vec<_>>()
    });
    let target = target_col.map(|c| RawColumn { column: c + 1, ..raw });
    Ok(RawTable {
        x,
        target,
        feature_names,
    })
}

/// Load a dataset: features plus labels (mapped to ±1) or real targets.
pub fn load_csv_from_reader<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let table = read_table(reader, Some(&schema.target), schema.delimiter, schema.header)?;
    let raw = table.target.expect("target column requested");
    let ds = match schema.task {
        Task::Classify => {
            let (map, labels) = LabelMap::encode_raw(&raw.values)?;
            Dataset::classification(table.x, labels, map)?
        }
        Task::Regress => Dataset::regression(table.x, raw.numbers()?)?,
    };
    Ok(match table.feature_names {
        Some(names) => ds.with_feature_names(names),
        None => ds,
    })
}

fn parse_number(field: &str, row: usize, column: usize, what: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::Parse {
            row,
            column,
            message: format!("non-finite {what} value {field:?}"),
        }),
        Err(_) => Err(Error::Parse {
            row,
            column,
            message: format!("non-numeric {what} value {field:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn load(text: &str, schema: &CsvSchema) -> Result<Dataset> {
        load_csv_from_reader(text.as_bytes(), schema)
    }

    #[test]
    fn labels_map_by_byte_order() {
        let ds = load("1,2,b\n3,4,a\n5,6,b\n", &CsvSchema::classification(ColumnRef::Index(2))).unwrap();
        assert_eq!(ds.labels().unwrap(), &[1, -1, 1]);
        let map = ds.label_map().unwrap();
        assert_eq!((map.negative.as_str(), map.positive.as_str()), ("a", "b"));
        assert_eq!(ds.x(), &array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        assert_eq!(map.decode(-1), "a");
        assert_eq!(map.encode("b"), Some(1));
    }

    #[test]
    fn non_numeric_feature_names_row_and_column() {
        let err = load("1,2,a\n3,abc,b\n", &CsvSchema::classification(ColumnRef::Index(-1))).unwrap_err();
        match &err {
            Error::Parse { row, column, .. } => assert_eq!((*row, *column), (2, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let msg = err.to_string();
        assert!(msg.contains("row 2") && msg.contains("column 2"), "{msg}");
    }

    #[test]
    fn header_is_skipped_and_names_resolve() {
        let text = "f1;label;f2\n1;x;2\n3;y;4\n";
        let schema = CsvSchema::classification(ColumnRef::Name("label".into()))
            .with_header(true)
            .with_delimiter(b';');
        let ds = load(text, &schema).unwrap();
        assert_eq!(ds.n_samples(), 2);
        assert_eq!(ds.feature_names().unwrap(), &["f1".to_string(), "f2".to_string()]);
        assert_eq!(ds.x(), &array![[1.0, 2.0], [3.0, 4.0]]);
    }

    #[test]
    fn class_count_and_column_errors() {
        let schema = CsvSchema::classification(ColumnRef::Index(1));
        assert!(matches!(load("1,a\n2,b\n3,c\n", &schema), Err(Error::MoreThanTwoClasses(_))));
        assert!(matches!(load("1,a\n2,a\n", &schema), Err(Error::TooFewClasses(_))));
        let named = CsvSchema::classification(ColumnRef::Name("y".into())).with_header(true);
        assert!(matches!(load("a,b\n1,x\n2,y\n", &named), Err(Error::MissingColumn(_))));
        assert!(matches!(
            load("1,a\n2,b\n", &CsvSchema::classification(ColumnRef::Index(5))),
            Err(Error::MissingColumn(_))
        ));
        assert!(matches!(load("1,2,a\n2,b\n", &CsvSchema::classification(ColumnRef::Index(-1))),
            Err(Error::Parse { row: 2, .. })));
    }

    #[test]
    fn regression_targets() {
        let ds = load("0.5,1.5\n1.0,2.5\n", &CsvSchema::regression(ColumnRef::Index(1))).unwrap();
        assert_eq!(ds.task(), Task::Regress);
        assert_eq!(ds.targets().unwrap(), &array![1.5, 2.5]);
        assert!(matches!(
            load("0.5,x\n", &CsvSchema::regression(ColumnRef::Index(1))),
            Err(Error::Parse { row: 1, column: 2, .. })
        ));
    }

    #[test]
    fn minmax_scaling() {
        let x = array![[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]];
        let ds = Dataset::regression(x, array![0.0, 1.0, 2.0]).unwrap();
        let scaled = ds.normalize_minmax().unwrap();
        assert_eq!(scaled.x(), &array![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]);
        let scaler = scaled.scaler().unwrap();
        assert_eq!(scaler.transform(array![[2.0, 7.0]].view()).unwrap(), array![[0.0, 0.0]]);
        // Refitting on scaled data changes nothing.
        assert_eq!(scaled.normalize_minmax().unwrap().x(), scaled.x());
        assert!(scaler.transform(array![[1.0]].view()).is_err());
    }
}
