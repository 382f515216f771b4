//! File formats: segmented OBJ, the BR-DF container and B-Rep JSON.

mod brep_json;
mod container;
mod obj;

pub use self::brep_json::{
    format_brep_json, read_brep_json, write_brep_json, BRepDocument, EdgeRecord, FaceRecord,
    Incidence, VertexRecord,
};
pub use self::container::{
    container_len, decode_container, encode_container, read_brdf, write_brdf, HEADER_LEN, MAGIC,
    VERSION,
};
pub use self::obj::{format_segmented_obj, parse_segmented_obj, read_segmented_obj, write_segmented_obj, ObjMesh};
