//! Triangulate a snowflake, check the mesh, and export it as OFF.
//!
//!     cargo run --release --example mesh_snowflake [out.off]

use std::fs::File;
use std::io::BufWriter;

use fractal_spectra::geometry::SnowflakeSpec;
use fractal_spectra::mesh;

fn main() -> fractal_spectra::Result<()> {
    let spec = SnowflakeSpec::classic(3)?;
    for refine in 0..3 {
        let m = mesh::mesh_snowflake(&spec, refine)?;
        println!(
            "refine {refine}: {} vertices, {} triangles, {} boundary, area {:.10}, euler {}, hanging {}",
            m.num_vertices(),
            m.num_triangles(),
            m.num_boundary(),
            m.area(),
            m.euler_characteristic(),
            m.hanging_vertices(1e-12).len()
        );
    }
    let quad = mesh::mesh_snowflake(&SnowflakeSpec::quadratic(0.2, 3)?, 0)?;
    println!("quadratic b=0.2 level 3: {} triangles, h = {:.5}", quad.num_triangles(), quad.h);

    if let Some(path) = std::env::args().nth(1) {
        let m = mesh::mesh_snowflake(&spec, 1)?;
        m.write_off(BufWriter::new(File::create(&path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
