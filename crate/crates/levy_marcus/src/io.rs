use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::flow::DefectRow;

pub const JUMP_HEADER: &str = "path_id,time,l";
pub const DEFECT_HEADER: &str = "l,r,defect,bound,pass";

fn write_atomic(path: &Path, body: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(body.as_bytes())?;
    f.sync_all()?;
    fs::rename(tmp, path)
}

/// One row per jump, `paths[i]` being the jumps of path i.
pub fn write_jump_log(path: &Path, paths: &[(u64, Vec<(f64, f64)>)]) -> io::Result<()> {
    let mut body = String::from(JUMP_HEADER);
    body.push('\n');
    for (id, jumps) in paths {
        for (t, l) in jumps {
            body.push_str(&format!("{id},{t:e},{l:e}\n"));
        }
    }
    write_atomic(path, &body)
}

/// Writes `{stem}_norm.csv` and `{stem}_linearized.csv` into `dir`.
pub fn write_defect_table(dir: &Path, stem: &str, rows: &[DefectRow]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut norm = format!("{DEFECT_HEADER}\n");
    let mut lin = norm.clone();
    for r in rows {
        norm.push_str(&format!(
            "{},{},{:e},{:e},{}\n",
            r.l,
            r.r,
            r.norm_defect,
            r.norm_bound,
            r.norm_pass()
        ));
        lin.push_str(&format!(
            "{},{},{:e},{:e},{}\n",
            r.l,
            r.r,
            r.linearized_defect,
            r.linearized_bound,
            r.linearized_pass()
        ));
    }
    write_atomic(&dir.join(format!("{stem}_norm.csv")), &norm)?;
    write_atomic(&dir.join(format!("{stem}_linearized.csv")), &lin)
}
