"""Guesser gateway: interchange loading, projection, alignment, error marking and the mock guesser."""

from .alignment import extract_alignment, submatrix_norm
from .loading import guess_record, load_guesses, parse_record, project_guess, write_guesses
from .marking import mark_errors
from .mock import mock_guess
from .models import (
    Alignment, Candidate, ErrorFlag, ErrorMask, GuessTuple, Mutation, MutationSpec,
    stochastic_rows, token_strings,
)

__all__ = [
    'extract_alignment', 'submatrix_norm',
    'guess_record', 'load_guesses', 'parse_record', 'project_guess', 'write_guesses',
    'mark_errors',
    'mock_guess',
    'Alignment', 'Candidate', 'ErrorFlag', 'ErrorMask', 'GuessTuple', 'Mutation', 'MutationSpec',
    'stochastic_rows', 'token_strings',
]
