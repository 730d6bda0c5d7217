"""Layer sampling and BiRB circuit construction"""
