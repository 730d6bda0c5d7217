"""Signed Pauli operators and Clifford actions"""
