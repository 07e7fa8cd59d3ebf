"""querydeck: parameterized SQL templates compiled into interactive data interfaces."""

from .catalog import (
    DatasetCatalog,
    ResultColumn,
    ResultTable,
    SemanticType,
    StorageType,
    fixed_clock,
    load_region_names,
)
from .errors import (
    BackendUnavailable,
    BankParseError,
    EmptyBank,
    EmptyCatalog,
    EmptyDomain,
    EmptyTable,
    IncompleteAssignment,
    MalformedCsv,
    QuerydeckError,
    SelectionOutOfRange,
    SpsSyntaxError,
    SqlError,
    TranslationFailed,
    UnknownColumn,
)
from .instantiator import (
    ChoiceAssignment,
    Index,
    IndexSet,
    Number,
    OptSwitch,
    QuerySpaceSize,
    Selection,
    Value,
    ValueSet,
    apply_delta,
    count_concrete_queries,
    default_assignment,
    enumerate_assignments,
    instantiate,
)
from .interface_mapper import (
    CostParams,
    InterfaceSpec,
    VisKind,
    WidgetKind,
    choose_visualization,
    detect_cross_view_bindings,
    generate_interface,
    interface_cost,
    interface_to_dict,
    serialize_interface,
    widget_candidates,
)
from .nl_translator import (
    LiveBackend,
    MockBackend,
    TranslationResult,
    load_example_bank,
    translate_all,
    translate_one,
)
from .service import create_app, selection_from_wire, selection_to_wire
from .sps_grammar import (
    ChoiceKind,
    ChoiceNode,
    SpsTemplate,
    parse_sps,
    print_sps,
    validate_template,
)

__version__ = "0.1.0"
