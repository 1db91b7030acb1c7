//! Single-page HTML report: inlines every SVG in the artifact directory
//! and lists the CSVs with a short preview, so one file can be mailed
//! around without losing the figures.

use crate::error::Result;
use crate::table::{atomic_write, read_csv};
use std::fs;
use std::path::{Path, PathBuf};

/// Write `report.html` into `dir`, returning its path. The page embeds
/// the SVG figures, quotes the manifest, and previews each CSV.
pub fn write_report(dir: &Path) -> Result<PathBuf> {
    let mut svgs: Vec<PathBuf> = Vec::new();
    let mut csvs: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        match path.extension().and_then(|e| e.to_str()) {
            Some("svg") => svgs.push(path),
            Some("csv") => csvs.push(path),
            _ => {}
        }
    }
    svgs.sort();
    csvs.sort();

    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">\n");
    html.push_str("<title>landscape-lab run report</title>\n<style>\n");
    html.push_str(
        "body{font-family:sans-serif;max-width:1040px;margin:2em auto;padding:0 1em}\n\
         svg{max-width:100%;height:auto}\n\
         table{border-collapse:collapse;font-size:13px}\n\
         td,th{border:1px solid #ccc;padding:2px 8px;text-align:right}\n\
         th{background:#f0f0f0}\n\
         pre{background:#f7f7f7;padding:1em;overflow-x:auto}\n\
         h2{border-bottom:1px solid #ddd;padding-bottom:4px}\n",
    );
    html.push_str("</style></head><body>\n<h1>landscape-lab run report</h1>\n");

    let manifest = dir.join("manifest.txt");
    if manifest.exists() {
        html.push_str("<h2>manifest</h2>\n<pre>");
        html.push_str(&escape(&fs::read_to_string(&manifest)?));
        html.push_str("</pre>\n");
    }

    for svg in &svgs {
        let name = svg.file_name().unwrap().to_string_lossy();
        html.push_str(&format!("<h2>{}</h2>\n", escape(&name)));
        html.push_str(&fs::read_to_string(svg)?);
    }

    for csv in &csvs {
        let name = csv.file_name().unwrap().to_string_lossy();
        html.push_str(&format!("<h2>{}</h2>\n", escape(&name)));
        match read_csv(&fs::read_to_string(csv)?) {
            Ok((header, rows)) => {
                html.push_str("<table>\n<tr>");
                for col in &header {
                    html.push_str(&format!("<th>{}</th>", escape(col)));
                }
                html.push_str("</tr>\n");
                for row in rows.iter().take(12) {
                    html.push_str("<tr>");
                    for cell in row {
                        html.push_str(&format!("<td>{}</td>", escape(cell)));
                    }
                    html.push_str("</tr>\n");
                }
                html.push_str("</table>\n");
                if rows.len() > 12 {
                    html.push_str(&format!("<p>... {} rows total</p>\n", rows.len()));
                }
            }
            Err(e) => {
                html.push_str(&format!("<p>unreadable: {}</p>\n", escape(&e.to_string())));
            }
        }
    }

    html.push_str("</body></html>\n");
    let path = dir.join("report.html");
    atomic_write(&path, html.as_bytes())?;
    Ok(path)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svg::Figure;
    use crate::table::Table;

    #[test]
    fn report_indexes_the_directory() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["a", "b"]);
        for i in 0..20 {
            t.push(vec![i.to_string(), (i * i).to_string()]).unwrap();
        }
        t.write(&dir.path().join("data.csv")).unwrap();
        let mut fig = Figure::new("curve", "x", "y");
        fig.add("s", &[0.0, 1.0], &[0.0, 1.0]).unwrap();
        atomic_write(
            &dir.path().join("fig.svg"),
            fig.render().unwrap().as_bytes(),
        )
        .unwrap();
        atomic_write(&dir.path().join("manifest.txt"), b"version = test\n").unwrap();

        let path = write_report(dir.path()).unwrap();
        let html = std::fs::read_to_string(path).unwrap();
        assert!(html.contains("<svg"));
        assert!(html.contains("data.csv"));
        assert!(html.contains("version = test"));
        assert!(html.contains("... 20 rows total"));
        assert!(html.contains("<!DOCTYPE html>"));
    }

    #[test]
    fn report_on_an_empty_directory_still_renders() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_report(dir.path()).unwrap();
        let html = std::fs::read_to_string(path).unwrap();
        assert!(html.contains("run report"));
    }
}
