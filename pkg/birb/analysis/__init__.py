"""Decay fitting, oracles and planning"""
