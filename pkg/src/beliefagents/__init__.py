"""Agent programming toolkit with LLM prompt templating and belief-mined RAG."""

from .beliefs import BeliefBase, Predicate, Var, parse_predicate, pred
from .templates import (
    CompositeTemplate,
    PromptTemplate,
    RAGTemplate,
    ResponseTemplate,
    create_composite,
    create_prompt_template,
    create_rag_template,
    create_response_template,
)

__version__ = "0.1.0"
