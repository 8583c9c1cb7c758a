"""Photon-vacuum entanglement between two honeycomb layers in a planar microcavity."""
