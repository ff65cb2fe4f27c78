//! Scatterer domains, interface-conforming meshes and boundary geometry
//! queries.

pub mod domain;
pub mod flatness;
pub mod locate;
pub mod mesh;

pub use domain::{
    build_disk_domain, build_graph_corner_domain, build_sector_domain, build_sector_domain_at, build_star_domain,
    DomainError, DomainKind, DomainSpec, Piece,
};
pub use flatness::{weak_flatness_check, FlatnessError};
pub use locate::TriangleLocator;
pub use mesh::{mesh_domain, EdgeTag, MeshError, MeshStats, MeshedDomain, SizeField, TaggedEdge};
