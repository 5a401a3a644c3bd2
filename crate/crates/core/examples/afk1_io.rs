//! Write a field in the binary field format and read it back.

use afreeqc::fields::*;

fn main() -> afreeqc::error::Result<()> {
    let dir = std::env::temp_dir().join("afreeqc-example");
    std::fs::create_dir_all(&dir)?;
    let dom = DomainSpec::unit_disk();
    let u = DomainField::from_fn(dom.clone(), dom.grid(32, 0.125)?, 2, |x, o| {
        o[0] = x[1];
        o[1] = -x[0];
    })?;
    let path = dir.join("rot.afk");
    write_afk1(&path, &AnyField::Domain(u.clone()))?;
    write_magnitude_csv(&dir.join("rot.csv"), &AnyField::Domain(u.clone()))?;
    let back = read_afk1(&path)?;
    println!("{} bytes, identical: {}", std::fs::metadata(&path)?.len(), back.values() == u.values() && back.mask() == Some(u.mask()));
    println!("wrote {}", dir.display());
    Ok(())
}
