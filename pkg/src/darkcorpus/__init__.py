"""Curation pipeline that turns crawled web pages into a pretraining corpus."""

__version__ = "0.1.0"
