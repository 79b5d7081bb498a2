//! Load JSON system descriptions and solve their Bowen equations.

use bowen_lab::bowen::dimension;
use bowen_lab::cli::schema::parse_description;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("systems");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for path in paths {
        let desc = parse_description(&std::fs::read_to_string(&path)?)?;
        let sys = desc.to_system(None)?;
        let sol = dimension(&sys, 0.0)?;
        println!("{:<22} {:<32} s* = {:.12}", path.file_name().unwrap().to_string_lossy(), sys.name(), sol.s_star);
    }
    Ok(())
}
