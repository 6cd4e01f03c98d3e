pub mod linalg;
pub mod group;
pub mod suborbifold;
pub mod maps;
pub mod metric;
pub mod scene;
pub mod corpus;
