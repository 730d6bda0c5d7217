"""Error generators, channels and noise models"""
