"""Event-log analytics for hackathon ecosystems.

Modules: :mod:`~kairos.ingest` (records, quality control, linkage),
:mod:`~kairos.sdgmap` (SDG tagging), :mod:`~kairos.dynamics` (stacks,
relaxation and scaling fits), :mod:`~kairos.tails` (power-law tails),
:mod:`~kairos.community` (newcomers, growth), :mod:`~kairos.enrichment`
(technology matrix, clustering), :mod:`~kairos.synth` (planted-truth
generators) and :mod:`~kairos.cli`.
"""
__version__ = "0.1.0"
