# 核心算法模块初始化文件
