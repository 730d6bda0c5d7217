"""Circuit containers and serialization"""
