# makes app a package

