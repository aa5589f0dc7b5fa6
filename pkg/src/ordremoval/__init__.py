"""Removal-lemma pipeline for ordered matchings in ordered uniform hypergraphs."""

from __future__ import annotations

