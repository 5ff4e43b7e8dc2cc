//! Document corpora: record schema, the on-disk store, and the auxiliary
//! tables derived from it (venue links, discipline taxonomy).

mod document;
mod store;
mod taxonomy;
mod venue;

pub use document::{Affiliation, AuthorRef, CorpusId, DisciplineWeight, Document};
pub use store::{DocumentStore, IngestReport, Rejection, StoreConfig};
pub use taxonomy::Taxonomy;
pub use venue::{build_venue_link_table, VenueLinkTable};
