//! Rendering helpers shared by the subcommands.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

/// Pretty JSON with the worker thread count attached.
pub fn json_with_threads<T: Serialize>(body: &T) -> anyhow::Result<String> {
    let mut value = serde_json::to_value(body)?;
    let threads = json!(rayon::current_num_threads());
    match &mut value {
        Value::Object(map) => {
            map.insert("threads".into(), threads);
        }
        other => {
            value = json!({ "results": other.take(), "threads": threads });
        }
    }
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

/// CSV from a header and rows of already formatted cells.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let quote = |cell: &str| {
        if cell.contains([',', '"', '\n']) {
            format!("\"{}\"", cell.replace('"', "\"\""))
        } else {
            cell.to_string()
        }
    };
    let _ = writeln!(out, "{}", header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row.iter().map(|c| quote(c)).collect::<Vec<_>>().join(","));
    }
    out
}

/// Markdown table from a header and rows.
pub fn markdown_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    out
}

pub fn threads_footer() -> String {
    format!("\nthreads: {}\n", rayon::current_num_threads())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_commas() {
        let out = csv(&["a", "b"], &[vec!["x,y".into(), "z".into()]]);
        assert_eq!(out, "a,b\n\"x,y\",z\n");
    }

    #[test]
    fn json_array_is_wrapped() {
        let out = json_with_threads(&vec![1, 2]).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["results"], json!([1, 2]));
        assert!(v["threads"].as_u64().unwrap() >= 1);
    }
}
