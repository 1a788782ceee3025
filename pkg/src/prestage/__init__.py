"""Pre-staged geo-demographic analytics: KML choropleths and XLSX radius workbooks."""

from .census_index import (
    BlockRecord,
    BoundingBox,
    CountryIndex,
    CountyMeta,
    CountyNode,
    Demographics,
    PolygonGeometry,
    StateMeta,
    StateNode,
    build_index,
    entity_counts,
    lookup_block,
)

__version__ = "0.1.0"
