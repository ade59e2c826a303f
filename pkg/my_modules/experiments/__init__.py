# 实验与验证模块初始化文件
