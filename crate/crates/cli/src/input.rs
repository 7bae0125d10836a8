//! KEEL and CSV dataset readers.

use std::path::Path;

use ndarray::Array2;
use pa_core::data::CategoryMap;
use pa_core::{encode_categoricals, ClassTag, Dataset};

use crate::error::{CliError, Result};

/// A parsed dataset plus the name of its label column.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub dataset: Dataset,
    pub label_name: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvOptions {
    /// Label column by header name or zero-based index; the last column when
    /// absent.
    pub label: Option<String>,
    pub encode_categoricals: bool,
    pub ignore_columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum AttrType {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
struct Attribute {
    name: String,
    kind: AttrType,
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('\'')
        .and_then(|t| t.strip_suffix('\''))
        .or_else(|| s.strip_prefix('"').and_then(|t| t.strip_suffix('"')))
        .unwrap_or(s)
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|v| unquote(v).to_string())
        .filter(|v| !v.is_empty())
        .collect()
}

fn parse_attribute(rest: &str, line: usize) -> Result<Attribute> {
    let malformed = |message: &str| CliError::MalformedHeader {
        line,
        message: message.to_string(),
    };
    let rest = rest.trim();
    let (name, spec) = if let Some(quoted) = rest.strip_prefix('\'') {
        let end = quoted.find('\'').ok_or_else(|| malformed("unterminated attribute name"))?;
        (&quoted[..end], &quoted[end + 1..])
    } else {
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '{')
            .ok_or_else(|| malformed("attribute without a type"))?;
        (&rest[..end], &rest[end..])
    };
    let spec = spec.trim();
    if name.is_empty() {
        return Err(malformed("empty attribute name"));
    }
    let kind = if let Some(body) = spec.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| malformed("unterminated nominal domain"))?;
        let values = split_list(body);
        if values.is_empty() {
            return Err(malformed("empty nominal domain"));
        }
        AttrType::Nominal(values)
    } else {
        let ty = spec
            .split(|c: char| c.is_whitespace() || c == '[')
            .next()
            .unwrap_or("")
            .to_ascii_lowercase();
        match ty.as_str() {
            "real" | "integer" | "numeric" => AttrType::Numeric,
            "" => return Err(malformed("attribute without a type")),
            other => return Err(malformed(&format!("unsupported attribute type `{other}`"))),
        }
    };
    Ok(Attribute {
        name: name.to_string(),
        kind,
    })
}

fn is_missing(value: &str) -> bool {
    value.is_empty() || value == "?" || value.eq_ignore_ascii_case("<null>")
}

fn parse_number(value: &str, line: usize, column: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::NonNumericFeature {
            line,
            column: column.to_string(),
            value: value.to_string(),
        })
}

/// Builds the feature matrix from per-column raw strings, encoding the
/// columns listed in `nominal` and parsing the rest as numbers.
fn assemble(
    columns: &[Vec<String>],
    names: &[String],
    nominal: &[bool],
    lines: &[usize],
) -> Result<(Array2<f64>, Vec<(usize, CategoryMap)>)> {
    let n = lines.len();
    let mut features = Array2::zeros((n, columns.len()));
    let mut maps = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        if nominal[j] {
            let (codes, map) = encode_categoricals(col);
            for (i, c) in codes.into_iter().enumerate() {
                features[[i, j]] = c as f64;
            }
            maps.push((j, map));
        } else {
            for (i, v) in col.iter().enumerate() {
                features[[i, j]] = parse_number(v, lines[i], &names[j])?;
            }
        }
    }
    Ok((features, maps))
}

fn build_dataset(
    features: Array2<f64>,
    maps: Vec<(usize, CategoryMap)>,
    labels: &[String],
    names: Vec<String>,
    class_order: Option<&[String]>,
) -> Result<Dataset> {
    let mut d = Dataset::from_raw_labels(features, labels, names, class_order)?;
    d.category_maps = maps;
    Ok(d)
}

pub fn parse_keel(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_keel_str(&text)
}

pub fn parse_keel_str(text: &str) -> Result<Loaded> {
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut inputs: Option<Vec<String>> = None;
    let mut output: Option<String> = None;
    let mut data_line = None;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    for (no, line) in lines.by_ref() {
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let Some(directive) = line.strip_prefix('@') else {
            return Err(CliError::MalformedHeader {
                line: no,
                message: "data before @data".into(),
            });
        };
        let (keyword, rest) = directive
            .split_once(|c: char| c.is_whitespace())
            .unwrap_or((directive, ""));
        match keyword.to_ascii_lowercase().as_str() {
            "relation" => {}
            "attribute" => attributes.push(parse_attribute(rest, no)?),
            "inputs" => inputs = Some(split_list(rest)),
            "outputs" | "output" => {
                let outs = split_list(rest);
                if outs.len() != 1 {
                    return Err(CliError::MalformedHeader {
                        line: no,
                        message: format!("expected one output attribute, found {}", outs.len()),
                    });
                }
                output = outs.into_iter().next();
            }
            "data" => {
                data_line = Some(no);
                break;
            }
            other => {
                return Err(CliError::MalformedHeader {
                    line: no,
                    message: format!("unknown directive @{other}"),
                })
            }
        }
    }
    let data_line = data_line.ok_or(CliError::MalformedHeader {
        line: text.lines().count(),
        message: "missing @data section".into(),
    })?;
    if attributes.len() < 2 {
        return Err(CliError::MalformedHeader {
            line: data_line,
            message: "need at least one input and one output attribute".into(),
        });
    }
    let position = |name: &str| {
        attributes.iter().position(|a| a.name == name).ok_or_else(|| CliError::MalformedHeader {
            line: data_line,
            message: format!("unknown attribute `{name}`"),
        })
    };
    let label_idx = match &output {
        Some(name) => position(name)?,
        None => attributes.len() - 1,
    };
    let feature_idx: Vec<usize> = match &inputs {
        Some(names) => names.iter().map(|n| position(n)).collect::<Result<_>>()?,
        None => (0..attributes.len()).filter(|&j| j != label_idx).collect(),
    };

    let mut columns = vec![Vec::new(); feature_idx.len()];
    let mut labels = Vec::new();
    let mut line_numbers = Vec::new();
    for (no, line) in lines {
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let values: Vec<&str> = line.split(',').map(|v| unquote(v)).collect();
        if values.len() != attributes.len() {
            return Err(CliError::RowArityMismatch {
                line: no,
                expected: attributes.len(),
                found: values.len(),
            });
        }
        if let Some(&j) = std::iter::once(&label_idx)
            .chain(&feature_idx)
            .find(|&&j| is_missing(values[j]))
        {
            return Err(CliError::MissingValue {
                line: no,
                column: attributes[j].name.clone(),
            });
        }
        for (c, &j) in feature_idx.iter().enumerate() {
            columns[c].push(values[j].to_string());
        }
        labels.push(values[label_idx].to_string());
        line_numbers.push(no);
    }

    let names: Vec<String> = feature_idx.iter().map(|&j| attributes[j].name.clone()).collect();
    let nominal: Vec<bool> = feature_idx
        .iter()
        .map(|&j| matches!(attributes[j].kind, AttrType::Nominal(_)))
        .collect();
    let (features, maps) = assemble(&columns, &names, &nominal, &line_numbers)?;
    let class_order = match &attributes[label_idx].kind {
        AttrType::Nominal(domain) => Some(domain.as_slice()),
        AttrType::Numeric => None,
    };
    Ok(Loaded {
        dataset: build_dataset(features, maps, &labels, names, class_order)?,
        label_name: attributes[label_idx].name.clone(),
    })
}

fn resolve_column(headers: &[String], key: &str) -> Option<usize> {
    headers
        .iter()
        .position(|h| h == key)
        .or_else(|| key.parse::<usize>().ok().filter(|&i| i < headers.len()))
}

pub fn parse_csv(path: &Path, opts: &CsvOptions) -> Result<Loaded> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    parse_csv_reader(file, opts)
}

pub fn parse_csv_reader(reader: impl std::io::Read, opts: &CsvOptions) -> Result<Loaded> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() {
        return Err(CliError::MissingLabelColumn("<last>".into()));
    }
    let label_idx = match &opts.label {
        Some(key) => resolve_column(&headers, key).ok_or_else(|| CliError::MissingLabelColumn(key.clone()))?,
        None => headers.len() - 1,
    };
    let mut ignored = Vec::new();
    for key in &opts.ignore_columns {
        let j = resolve_column(&headers, key)
            .ok_or_else(|| CliError::Usage(format!("ignored column `{key}` not found")))?;
        ignored.push(j);
    }
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|j| *j != label_idx && !ignored.contains(j))
        .collect();

    let mut columns = vec![Vec::new(); feature_idx.len()];
    let mut labels = Vec::new();
    let mut line_numbers = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 2, |p| p.line() as usize);
        for (c, &j) in feature_idx.iter().enumerate() {
            let v = record.get(j).unwrap_or("");
            if is_missing(v) {
                return Err(CliError::MissingValue {
                    line,
                    column: headers[j].clone(),
                });
            }
            columns[c].push(v.to_string());
        }
        let label = record.get(label_idx).unwrap_or("");
        if label.is_empty() {
            return Err(CliError::MissingValue {
                line,
                column: headers[label_idx].clone(),
            });
        }
        labels.push(label.to_string());
        line_numbers.push(line);
    }

    let names: Vec<String> = feature_idx.iter().map(|&j| headers[j].clone()).collect();
    let nominal: Vec<bool> = columns
        .iter()
        .map(|col| opts.encode_categoricals && col.iter().any(|v| v.parse::<f64>().is_err()))
        .collect();
    let (features, maps) = assemble(&columns, &names, &nominal, &line_numbers)?;
    Ok(Loaded {
        dataset: build_dataset(features, maps, &labels, names, None)?,
        label_name: headers[label_idx].clone(),
    })
}

/// Reads a `.dat` / `.keel` file as KEEL and anything else as CSV.
pub fn load(path: &Path, opts: &CsvOptions) -> Result<Loaded> {
    let keel = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("dat") || e.eq_ignore_ascii_case("keel"));
    if keel {
        parse_keel(path)
    } else {
        parse_csv(path, opts)
    }
}

/// Relabels so that `minority` is the minority class regardless of counts.
pub fn force_minority(d: &mut Dataset, minority: &str) -> Result<()> {
    if d.class_names[0] == minority {
        return Ok(());
    }
    if d.class_names[1] != minority {
        return Err(CliError::Usage(format!("class `{minority}` does not occur in the labels")));
    }
    for l in d.labels.iter_mut() {
        *l = match l {
            ClassTag::Minority => ClassTag::Majority,
            ClassTag::Majority => ClassTag::Minority,
        };
    }
    d.class_names.swap(0, 1);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
@relation toy
@attribute a real [0.0, 5.0]
@attribute class {pos, neg}
@inputs a
@outputs class
@data
1.0, neg
2.5, neg
3.0, neg
0.5, pos
";

    #[test]
    fn minimal_keel() {
        let l = parse_keel_str(MINIMAL).unwrap();
        assert_eq!(l.dataset.n_rows(), 4);
        assert_eq!(l.dataset.n_features(), 1);
        assert_eq!(l.dataset.class_names, ["pos".to_string(), "neg".to_string()]);
        assert_eq!(l.dataset.n_min(), 1);
        assert_eq!(l.label_name, "class");
    }

    #[test]
    fn nominal_input_is_encoded() {
        let text = "@relation t\n@attribute c {a,b}\n@attribute x integer[0,9]\n@attribute y{p,n}\n@inputs c, x\n@outputs y\n@data\nb,1,n\na,2,n\nb,3,p\n";
        let l = parse_keel_str(text).unwrap();
        assert_eq!(l.dataset.features.column(0).to_vec(), vec![0.0, 1.0, 0.0]);
        assert_eq!(l.dataset.category_maps.len(), 1);
        assert_eq!(l.dataset.category_maps[0].1.code("a"), Some(1));
    }

    #[test]
    fn keel_errors_carry_line_numbers() {
        let short = MINIMAL.replace("2.5, neg", "2.5");
        match parse_keel_str(&short) {
            Err(CliError::RowArityMismatch { line: 8, expected: 2, found: 1 }) => {}
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("@attribute a real", "@attribute a string");
        assert!(matches!(parse_keel_str(&bad), Err(CliError::MalformedHeader { line: 2, .. })));
        let missing = MINIMAL.replace("3.0, neg", "?, neg");
        assert!(matches!(parse_keel_str(&missing), Err(CliError::MissingValue { line: 9, .. })));
        let text = MINIMAL.replace("3.0, neg", "abc, neg");
        assert!(matches!(parse_keel_str(&text), Err(CliError::NonNumericFeature { line: 9, .. })));
        assert!(matches!(
            parse_keel_str("@relation x\n@attribute a real\n"),
            Err(CliError::MalformedHeader { .. })
        ));
    }

    #[test]
    fn keel_whitespace_and_comments() {
        let text = "% comment\n\n  @RELATION toy\n@ATTRIBUTE  a  REAL\n@attribute 'b c' real\n@attribute class {pos,neg}\n@data\n% rows\n 1 , 2 , neg\n3,4,pos\n\n5,6,neg\n";
        let l = parse_keel_str(text).unwrap();
        assert_eq!(l.dataset.feature_names, vec!["a", "b c"]);
        assert_eq!(l.dataset.n_rows(), 3);
    }

    fn csv(text: &str, opts: &CsvOptions) -> Result<Loaded> {
        parse_csv_reader(text.as_bytes(), opts)
    }

    #[test]
    fn csv_default_label_is_last() {
        let l = csv("a,b,y\n1,2,u\n3,4,v\n5,6,v\n", &CsvOptions::default()).unwrap();
        assert_eq!(l.dataset.n_features(), 2);
        assert_eq!(l.label_name, "y");
        assert_eq!(l.dataset.class_names, ["u".to_string(), "v".to_string()]);
    }

    #[test]
    fn csv_label_by_name_and_index() {
        let text = "class,a,b\nx,1,2\ny,3,4\ny,5,6\n";
        let by_name = CsvOptions {
            label: Some("class".into()),
            ..Default::default()
        };
        let l = csv(text, &by_name).unwrap();
        assert_eq!(l.dataset.feature_names, vec!["a", "b"]);
        let by_index = CsvOptions {
            label: Some("0".into()),
            ..Default::default()
        };
        assert_eq!(csv(text, &by_index).unwrap(), l);
        let missing = CsvOptions {
            label: Some("target".into()),
            ..Default::default()
        };
        assert!(matches!(csv(text, &missing), Err(CliError::MissingLabelColumn(_))));
    }

    #[test]
    fn csv_categoricals() {
        let text = "a,color,y\n1,red,p\n2,blue,n\n3,red,n\n";
        assert!(matches!(
            csv(text, &CsvOptions::default()),
            Err(CliError::NonNumericFeature { line: 2, .. })
        ));
        let opts = CsvOptions {
            encode_categoricals: true,
            ..Default::default()
        };
        let l = csv(text, &opts).unwrap();
        assert_eq!(l.dataset.features.column(1).to_vec(), vec![0.0, 1.0, 0.0]);
        let ignore = CsvOptions {
            ignore_columns: vec!["color".into()],
            ..Default::default()
        };
        assert_eq!(csv(text, &ignore).unwrap().dataset.n_features(), 1);
    }

    #[test]
    fn forced_minority_swaps_tags() {
        let mut d = csv("a,y\n1,u\n2,v\n3,v\n", &CsvOptions::default()).unwrap().dataset;
        force_minority(&mut d, "v").unwrap();
        assert_eq!(d.class_names, ["v".to_string(), "u".to_string()]);
        assert_eq!(d.n_min(), 2);
        assert!(force_minority(&mut d, "w").is_err());
    }
}
