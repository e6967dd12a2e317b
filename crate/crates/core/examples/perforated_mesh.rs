//! Meshes a square with three cores and writes the triangle table.

use defect_equilibrium::domain::{build_perforated_domain, generate_mesh, MeshOptions, OuterBoundary};
use defect_equilibrium::{Defect, DefectConfiguration};

fn main() -> defect_equilibrium::Result<()> {
    let outer = OuterBoundary::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])?;
    let defects = DefectConfiguration::new(vec![
        Defect::disclination([-0.5, -0.3], 0.4),
        Defect::dislocation([0.4, -0.4], [1.0, 0.0]),
        Defect::dislocation([0.1, 0.5], [0.0, -1.0]),
    ])?;
    let dom = build_perforated_domain(outer, &defects, 0.15)?;
    for h in [0.14, 0.1, 0.05] {
        let mesh = generate_mesh(&dom, &MeshOptions::new(h))?;
        let s = mesh.stats(dom.num_loops());
        println!(
            "h={h:<5} {:>6} triangles, min angle {:5.2} deg, area {:.6} (exact {:.6})",
            s.triangles,
            s.min_angle_deg,
            s.area,
            dom.area()
        );
    }
    let mesh = generate_mesh(&dom, &MeshOptions::new(0.14))?;
    let path = std::env::temp_dir().join("perforated_mesh.txt");
    mesh.write_table(std::fs::File::create(&path)?)?;
    println!("mesh table written to {}", path.display());
    Ok(())
}
