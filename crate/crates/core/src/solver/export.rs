use std::io::Write;

use super::SolutionSet;
use crate::error::Result;

/// Writes one row per solution: index, `n^2 c_i / c`, condition, regular, residual.
pub fn write_solutions_csv<W: Write>(set: &SolutionSet, out: W) -> Result<()> {
    let n = set.spec.n();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["index".to_string()];
    header.extend((1..=n).map(|i| format!("n2c{i}/c")));
    header.extend(["condition", "regular", "residual"].map(String::from));
    w.write_record(&header)?;
    for (i, s) in set.solutions.iter().enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(s.scaled.iter().map(|v| format!("{v:.10}")));
        row.push(format!("{:.10}", s.condition));
        row.push(s.regular.to_string());
        row.push(format!("{:e}", s.residual_inf));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn solutions_csv(set: &SolutionSet) -> Result<String> {
    let mut buf = Vec::new();
    write_solutions_csv(set, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
