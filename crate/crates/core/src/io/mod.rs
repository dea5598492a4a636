//! File formats: ETRep JSON documents, feature CSVs and OBJ meshes.

mod features;
mod json;
mod mesh;

pub use features::{read_feature_csv, write_feature_csv};
pub use json::{
    etrep_from_str, etrep_from_value, etrep_to_string, etrep_to_value, list_json_files, read_etrep, read_population,
    write_etrep, SCHEMA_VERSION,
};
pub use mesh::{export_morph, export_obj, BoundaryMesh, DEFAULT_RING_SAMPLES};
