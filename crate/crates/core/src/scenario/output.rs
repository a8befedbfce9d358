use std::io::Write;
use std::path::Path;

use super::{MetricsRecord, MobilityTrace, ValidationRow};
use crate::error::{Error, Result};

/// Writes through a temporary file in the target directory, then renames it
/// into place; the target never holds a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `n,pf,miss_nc,miss_dist,miss_cent,fa_nc,fa_dist,fa_cent,maxsize_obs,maxsize_avg,mmax`
pub fn metrics_csv(records: &[MetricsRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n", "pf", "miss_nc", "miss_dist", "miss_cent", "fa_nc", "fa_dist", "fa_cent", "maxsize_obs",
        "maxsize_avg", "mmax",
    ])?;
    for r in records {
        w.write_record([
            r.n_sus.to_string(),
            opt(r.pf_target),
            r.avg_missing_noncoop.to_string(),
            r.avg_missing_distributed.to_string(),
            opt(r.avg_missing_centralized),
            r.avg_falsealarm_noncoop.to_string(),
            r.avg_falsealarm_distributed.to_string(),
            opt(r.avg_falsealarm_centralized),
            r.max_coalition_size_observed.to_string(),
            r.avg_max_coalition_size.to_string(),
            r.mmax_bound.to_string(),
        ])?;
    }
    into_string(w)
}

/// `step,displacement_m,node_id,coalition_id,utility`, one row per SU per
/// sample; a coalition is identified by its lowest member id.
pub fn mobility_csv(trace: &MobilityTrace) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["step", "displacement_m", "node_id", "coalition_id", "utility"])?;
    for s in &trace.samples {
        for (&id, utility) in &s.utilities {
            let label = s
                .partition
                .coalition_of(id)
                .and_then(|c| c.members.min_id())
                .unwrap_or(id);
            w.write_record([
                s.step.to_string(),
                s.displacement_m.to_string(),
                id.to_string(),
                label.to_string(),
                utility.to_string(),
            ])?;
        }
    }
    into_string(w)
}

/// Closed-form vs simulated rates, one row per coalition.
pub fn validation_csv(rows: &[ValidationRow], k_sigma: f64) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "coalition", "members", "head", "qm", "qm_mc", "qm_se", "qf", "qf_mc", "qf_se", "pass",
    ])?;
    for r in rows {
        let members: Vec<String> = r.members.iter().map(|id| id.to_string()).collect();
        w.write_record([
            r.index.to_string(),
            members.join(" "),
            r.head.to_string(),
            r.analytic.qm().to_string(),
            r.estimate.qm.to_string(),
            r.null_stderr(r.analytic.qm()).to_string(),
            r.analytic.qf().to_string(),
            r.estimate.qf.to_string(),
            r.null_stderr(r.analytic.qf()).to_string(),
            r.within(k_sigma).to_string(),
        ])?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"a\n").unwrap();
        write_atomic(&path, b"b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn empty_centralized_columns() {
        let r = MetricsRecord {
            n_sus: 30,
            pf_target: None,
            avg_missing_noncoop: 0.1,
            avg_missing_distributed: 0.02,
            avg_missing_centralized: None,
            avg_falsealarm_noncoop: 0.05,
            avg_falsealarm_distributed: 0.06,
            avg_falsealarm_centralized: None,
            max_coalition_size_observed: 4,
            avg_max_coalition_size: 3.5,
            mmax_bound: 21,
        };
        let text = metrics_csv(&[r]).unwrap();
        assert_eq!(
            text,
            "n,pf,miss_nc,miss_dist,miss_cent,fa_nc,fa_dist,fa_cent,maxsize_obs,maxsize_avg,mmax\n\
             30,,0.1,0.02,,0.05,0.06,,4,3.5,21\n"
        );
    }
}
